/** Wire types for the agent HTTP API. */

export interface SentenceRef {
  windowId: number;
  docId: string;
  text: string;
}

export interface RelatedScd {
  scdId: number;
  kind: string;
  /** Exact rational factor, serialized as "n/d" or "n". */
  factor: string;
}

export interface ResponseEntry {
  scdId: number;
  label: string | null;
  score: number;
  sentences: SentenceRef[];
  related: RelatedScd[];
}

export interface IrResponse {
  responseId: number;
  entries: ResponseEntry[];
}

export type FeedbackKind =
  | "NewQuery"
  | "SelectScd"
  | "SelectSentence"
  | "FaultySentence"
  | "FaultyAssociation"
  | "RevertChanges"
  | "AddData";

export interface FeedbackResult {
  version: number;
  digest: string;
}

export interface IfiAction {
  op: "refresh" | "fresh";
  windowId: number;
  scdId: number;
}

export interface IfiResult {
  version: number;
  applied: IfiAction[];
  digest: string;
}

export interface VersionsInfo {
  current: number;
  versions: number[];
  digest: string;
}

export interface CounterEntry {
  rc: number;
  sc: number;
}

/** Keys are "kind:id", e.g. "scd:3" or "sentence:12". */
export type CounterMap = Record<string, CounterEntry>;

/** Relation as serialized by the service: [factor, kind, targetType, target]. */
export type RelationTuple = [string, string, string, number | string];

export interface ScdInfo {
  scdId: number;
  label: string | null;
  labelFactor: string;
  relations: RelationTuple[];
  windows: number[];
  responseCount: number;
  selectCount: number;
}

export interface SentenceInfo {
  windowId: number;
  docId: string;
  position: number;
  text: string;
  scdId: number | null;
  responseCount: number;
  selectCount: number;
}
