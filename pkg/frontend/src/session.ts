import type { ApiClient } from "./api.js";
import type { Instrument, Progress, Scale, Scores, SubmitResult } from "./types.js";
import type { ArticleCard } from "./types.js";

/** What the UI should render next. State derives entirely from the server:
 * no rating is held locally once acknowledged, so a page refresh resumes at
 * the correct card. */
export type View =
  | { kind: "guidance"; text: string }
  | { kind: "article"; card: ArticleCard; items: string[] }
  | { kind: "battery"; items: string[] }
  | { kind: "done" };

export function isValidScore(value: unknown, scale: Scale): value is number {
  return (
    typeof value === "number" &&
    Number.isInteger(value) &&
    value >= scale.min &&
    value <= scale.max
  );
}

/** True only when every item has an in-range integer score; mirrors the
 * server's validation so the submit button can be disabled client-side. */
export function isComplete(
  items: string[],
  scores: Partial<Scores>,
  scale: Scale,
): boolean {
  return items.every((item) => isValidScore(scores[item], scale));
}

export class Session {
  private instrument_: Instrument | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly respondentId: string,
  ) {}

  get instrument(): Instrument {
    if (!this.instrument_) throw new Error("session not started");
    return this.instrument_;
  }

  /** Validates the respondent id against the server and loads the
   * instrument; resolves to the guidance screen. */
  async start(): Promise<View> {
    await this.api.progress(this.respondentId); // 404s for unknown ids
    this.instrument_ = await this.api.instrument();
    return { kind: "guidance", text: this.instrument_.guidance };
  }

  /** Asks the server what comes next: an article card, the battery, or
   * the done screen. */
  async next(): Promise<View> {
    const assignment = await this.api.assignment(this.respondentId);
    switch (assignment.status) {
      case "article":
        return {
          kind: "article",
          card: assignment.article,
          items: assignment.items,
        };
      case "battery":
        return { kind: "battery", items: assignment.items };
      case "done":
        return { kind: "done" };
    }
  }

  canSubmit(items: string[], scores: Partial<Scores>): boolean {
    return isComplete(items, scores, this.instrument.scale);
  }

  submitArticle(articleId: string, scores: Scores): Promise<SubmitResult> {
    return this.api.submitRating(this.respondentId, articleId, scores);
  }

  submitBattery(scores: Scores): Promise<SubmitResult> {
    return this.api.submitRating(
      this.respondentId,
      this.instrument.battery_article_id,
      scores,
    );
  }

  progress(): Promise<Progress> {
    return this.api.progress(this.respondentId);
  }
}
