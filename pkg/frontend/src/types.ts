/** JSON payload shapes of the rating service API. */

export interface Scale {
  min: number;
  max: number;
}

export interface BatteryItem {
  key: string;
  reverse_coded: boolean;
}

export interface Instrument {
  guidance: string;
  scale: Scale;
  rating_items: string[];
  battery_items: BatteryItem[];
  battery_article_id: string;
}

export interface ArticleCard {
  article_id: string;
  headline: string;
  byline: string[];
  published_date: string;
  image_url: string | null;
}

export type Assignment =
  | { status: "article"; article: ArticleCard; items: string[] }
  | { status: "battery"; items: string[] }
  | { status: "done" };

export interface Progress {
  respondent_id: string;
  rated: number;
  total: number;
  fraction: number;
}

export interface SubmitResult {
  status: "accepted" | "duplicate";
}

export type Scores = Record<string, number>;
