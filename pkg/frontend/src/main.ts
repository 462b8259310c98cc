import { ApiClient, ApiError } from "./api.js";
import { Session, type View } from "./session.js";
import type { Scale, Scores } from "./types.js";

const LABELS: Record<string, string> = {
  personal_interest: "How interesting is this to you personally?",
  public_importance: "How important is it for the public to know about?",
  informs_civic_decisions: "It would help people make civic decisions",
  holds_power_to_account: "It holds powerful institutions to account",
  community_relevance: "It is relevant to my community",
  follows_local_news: "I regularly follow local news",
  votes_in_local_elections: "I vote in local elections",
  discusses_news_with_others: "I discuss the news with other people",
  contacts_representatives: "I have contacted an elected representative",
  news_is_waste_of_time: "Following the news is a waste of time",
  avoids_news: "I actively avoid the news",
};

function label(item: string): string {
  return LABELS[item] ?? item.replace(/_/g, " ");
}

const root = document.getElementById("app") as HTMLElement;

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function scaleRow(
  item: string,
  scale: Scale,
  scores: Partial<Scores>,
  onChange: () => void,
): HTMLElement {
  const row = el("div", "item-row");
  row.appendChild(el("span", "item-label", label(item)));
  const group = el("div", "scale-group");
  for (let v = scale.min; v <= scale.max; v++) {
    const wrap = el("label", "scale-option");
    const input = document.createElement("input");
    input.type = "radio";
    input.name = `score-${item}`;
    input.value = String(v);
    if (scores[item] === v) input.checked = true;
    input.addEventListener("change", () => {
      scores[item] = v;
      onChange();
    });
    wrap.appendChild(input);
    wrap.appendChild(el("span", "", String(v)));
    group.appendChild(wrap);
  }
  row.appendChild(group);
  return row;
}

async function renderProgress(session: Session, container: HTMLElement) {
  const p = await session.progress();
  const bar = el("div", "progress", `Rated ${p.rated} of ${p.total}`);
  container.appendChild(bar);
}

function renderLanding(onSubmit: (respondentId: string) => void) {
  root.replaceChildren();
  const box = el("div", "card");
  box.appendChild(el("h1", "", "News rating study"));
  box.appendChild(el("p", "", "Enter your respondent ID to begin."));
  const input = document.createElement("input");
  input.placeholder = "e.g. r0001";
  const go = el("button", "primary", "Start") as HTMLButtonElement;
  const err = el("p", "error");
  go.addEventListener("click", () => {
    const id = input.value.trim();
    if (!id) {
      err.textContent = "Please enter a respondent ID.";
      return;
    }
    onSubmit(id);
  });
  box.append(input, go, err);
  root.appendChild(box);
}

function renderGuidance(text: string, onContinue: () => void) {
  root.replaceChildren();
  const box = el("div", "card");
  box.appendChild(el("h1", "", "Before you begin"));
  box.appendChild(el("p", "guidance", text));
  const go = el("button", "primary", "Continue");
  go.addEventListener("click", onContinue);
  box.appendChild(go);
  root.appendChild(box);
}

function renderRatingForm(
  session: Session,
  view: Extract<View, { kind: "article" | "battery" }>,
  advance: () => void,
) {
  root.replaceChildren();
  const box = el("div", "card");
  // entered scores live here until the server acknowledges them, so a
  // failed submit keeps everything the respondent typed
  const scores: Partial<Scores> = {};

  if (view.kind === "article") {
    const card = view.card;
    box.appendChild(el("h2", "headline", card.headline));
    const meta = el("p", "meta");
    meta.textContent = [card.byline.join(", "), card.published_date]
      .filter(Boolean)
      .join(" · ");
    box.appendChild(meta);
    if (card.image_url) {
      const img = document.createElement("img");
      img.src = card.image_url;
      img.alt = "";
      box.appendChild(img);
    }
  } else {
    box.appendChild(el("h2", "", "About you and the news"));
    box.appendChild(
      el("p", "meta", "Finally, a few questions about your news habits."),
    );
  }

  const submit = el("button", "primary", "Submit") as HTMLButtonElement;
  const banner = el("p", "error");
  const prompt = el("p", "hint", "Please answer every item (1–5).");
  submit.disabled = true;

  const refresh = () => {
    submit.disabled = !session.canSubmit(view.items, scores);
    prompt.style.display = submit.disabled ? "" : "none";
  };
  for (const item of view.items) {
    box.appendChild(scaleRow(item, session.instrument.scale, scores, refresh));
  }

  let inFlight = false; // guards double-click; the server dedupes anyway
  submit.addEventListener("click", async () => {
    if (inFlight || !session.canSubmit(view.items, scores)) return;
    inFlight = true;
    submit.disabled = true;
    try {
      if (view.kind === "article") {
        await session.submitArticle(view.card.article_id, scores as Scores);
      } else {
        await session.submitBattery(scores as Scores);
      }
      advance();
    } catch (err) {
      banner.textContent =
        err instanceof ApiError
          ? `Could not submit (${err.code}). Please try again.`
          : "Network problem. Your answers are kept — please retry.";
      inFlight = false;
      refresh();
    }
  });

  box.append(prompt, submit, banner);
  root.appendChild(box);
  if (view.kind === "article") {
    void renderProgress(session, box);
  }
}

function renderDone(session: Session) {
  root.replaceChildren();
  const box = el("div", "card");
  box.appendChild(el("h1", "", "All done — thank you!"));
  box.appendChild(el("p", "", "Your ratings have been recorded."));
  root.appendChild(box);
  void renderProgress(session, box);
}

async function showNext(session: Session) {
  const view = await session.next();
  switch (view.kind) {
    case "article":
    case "battery":
      renderRatingForm(session, view, () => void showNext(session));
      break;
    case "done":
      renderDone(session);
      break;
    case "guidance":
      break; // next() never returns guidance
  }
}

async function begin(respondentId: string) {
  const session = new Session(
    new ApiClient((input, init) => fetch(input, init)),
    respondentId,
  );
  try {
    const guidance = await session.start();
    if (guidance.kind === "guidance") {
      renderGuidance(guidance.text, () => void showNext(session));
    }
  } catch (err) {
    renderLanding(begin);
    const notice = el(
      "p",
      "error",
      err instanceof ApiError && err.status === 404
        ? "Unknown respondent ID."
        : "Could not reach the server. Please try again.",
    );
    root.appendChild(notice);
  }
}

renderLanding(begin);
