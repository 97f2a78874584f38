/** Payload shapes served by the curation API. The UI performs no matching
 * logic of its own: every score and selection state shown on screen comes
 * from one of these responses. */

export interface ClusterSummary {
  cluster_id: string;
  source: string;
  anchor_title: string;
  member_count: number;
}

export interface ClusterListPayload {
  clusters: ClusterSummary[];
}

export interface AnchorView {
  global_id: string;
  native_id: string;
  title: string;
  contributors: string[];
  score: number;
  title_score: number;
  contributor_score: number | null;
}

export interface ClusterMemberView {
  native_id: string;
  global_id: string;
  title: string;
  contributors: string[];
  identifiers: Record<string, string[]>;
  work_id: string | null;
  selected: boolean;
  score: number;
  provenance_url: string;
}

export interface ClusterView {
  cluster_id: string;
  source: string;
  work_id: string | null;
  anchor: AnchorView;
  members: ClusterMemberView[];
}

export interface SourceRecordView {
  source: string;
  native_id: string;
  global_id: string;
  title: string;
  contributors: string[];
  work_id: string | null;
  identifiers: Record<string, string[]>;
  metadata: Record<string, unknown>;
  provenance_url: string;
}

export interface ToggleAck {
  cluster_id: string;
  native_id: string;
  selected: boolean;
}
