import { ApiError, CurationApi } from "./api.js";
import { optimistic } from "./optimistic.js";
import type { ClusterMemberView, ClusterView, SourceRecordView } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function identifierSummary(identifiers: Record<string, string[]>): string {
  return Object.entries(identifiers)
    .filter(([, values]) => values.length > 0)
    .map(([key, values]) => `${key}: ${values.join(", ")}`)
    .join(" · ");
}

/** Cluster review application: list clusters, curate members, inspect
 * source records. All state shown comes from curation-API responses. */
export class App {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: CurationApi,
  ) {}

  async route(hash: string): Promise<void> {
    const path = hash.replace(/^#/, "");
    if (path.startsWith("/cluster/")) {
      await this.showCluster(decodeURIComponent(path.slice("/cluster/".length)));
    } else if (path.startsWith("/record/")) {
      await this.showRecord(decodeURIComponent(path.slice("/record/".length)));
    } else {
      await this.showHome();
    }
  }

  private clear(): HTMLElement {
    this.root.textContent = "";
    return this.root;
  }

  private toast(message: string): void {
    const note = el("div", "toast", message);
    note.setAttribute("data-testid", "toast");
    this.root.appendChild(note);
    setTimeout(() => note.remove(), 4000);
  }

  private renderNotFound(kind: string, id: string): void {
    const container = this.clear();
    const panel = el("section", "panel not-found");
    panel.setAttribute("data-testid", "not-found");
    panel.appendChild(el("h2", undefined, `${kind} not found`));
    panel.appendChild(el("p", undefined, id));
    const back = el("a", undefined, "Back to clusters");
    back.href = "#/";
    panel.appendChild(back);
    container.appendChild(panel);
  }

  private renderError(message: string, retry: () => void): void {
    const container = this.clear();
    const banner = el("section", "panel error-banner");
    banner.setAttribute("data-testid", "retry-banner");
    banner.appendChild(el("p", undefined, `Service unreachable: ${message}`));
    const button = el("button", undefined, "Retry");
    button.addEventListener("click", retry);
    banner.appendChild(button);
    container.appendChild(banner);
  }

  async showHome(): Promise<void> {
    let clusters;
    try {
      clusters = await this.api.listClusters();
    } catch (err) {
      this.renderError(String((err as Error).message), () => void this.showHome());
      return;
    }
    const container = this.clear();
    container.appendChild(el("h2", undefined, "Work clusters"));
    if (clusters.length === 0) {
      const empty = el(
        "p",
        "empty",
        "No clusters yet. Run a reconciliation against this service first.",
      );
      empty.setAttribute("data-testid", "empty-home");
      container.appendChild(empty);
      return;
    }
    const list = el("ul", "cluster-list");
    list.setAttribute("data-testid", "cluster-list");
    for (const summary of clusters) {
      const item = el("li");
      const link = el("a", undefined, summary.anchor_title);
      link.href = `#/cluster/${encodeURIComponent(summary.cluster_id)}`;
      item.appendChild(link);
      item.appendChild(
        el(
          "span",
          "muted",
          ` ${summary.source} · ${summary.member_count} member(s)`,
        ),
      );
      list.appendChild(item);
    }
    container.appendChild(list);
  }

  async showCluster(clusterId: string): Promise<void> {
    let cluster: ClusterView;
    try {
      cluster = await this.api.getCluster(clusterId);
    } catch (err) {
      if (err instanceof ApiError && err.notFound) {
        this.renderNotFound("Cluster", clusterId);
      } else {
        this.renderError(String((err as Error).message), () =>
          void this.showCluster(clusterId),
        );
      }
      return;
    }

    const container = this.clear();
    const header = el("section", "panel");
    header.appendChild(el("h2", undefined, cluster.anchor.title));
    const meta = el(
      "p",
      "muted",
      `${cluster.cluster_id} · anchor ${cluster.anchor.native_id} · ` +
        `score ${cluster.anchor.score}`,
    );
    meta.setAttribute("data-testid", "cluster-meta");
    header.appendChild(meta);
    container.appendChild(header);

    const table = el("table", "members");
    table.setAttribute("data-testid", "member-table");
    const head = el("tr");
    for (const label of ["In work", "Title", "Contributors", "Score", "Identifiers", ""]) {
      head.appendChild(el("th", undefined, label));
    }
    table.appendChild(head);
    for (const member of cluster.members) {
      table.appendChild(this.memberRow(cluster, member));
    }
    container.appendChild(table);

    const back = el("a", undefined, "← all clusters");
    back.href = "#/";
    container.appendChild(back);
  }

  private memberRow(cluster: ClusterView, member: ClusterMemberView): HTMLTableRowElement {
    const row = el("tr", "member-row");
    row.setAttribute("data-testid", "member-row");
    row.dataset["nativeId"] = member.native_id;

    const toggleCell = el("td");
    const checkbox = el("input");
    checkbox.type = "checkbox";
    checkbox.checked = member.selected;
    checkbox.setAttribute("data-testid", "member-toggle");
    checkbox.addEventListener("change", () => {
      void this.toggleSelection(cluster.cluster_id, member.native_id, checkbox, row);
    });
    toggleCell.appendChild(checkbox);
    row.appendChild(toggleCell);

    const titleCell = el("td");
    const recordLink = el("a", undefined, member.title);
    recordLink.href = `#/record/${encodeURIComponent(member.global_id)}`;
    recordLink.setAttribute("data-testid", "member-title");
    titleCell.appendChild(recordLink);
    row.appendChild(titleCell);

    row.appendChild(el("td", undefined, member.contributors.join("; ")));

    const scoreCell = el("td", "score", String(member.score));
    scoreCell.setAttribute("data-testid", "member-score");
    row.appendChild(scoreCell);

    row.appendChild(el("td", "identifiers", identifierSummary(member.identifiers)));

    const sourceCell = el("td");
    const provenance = el("a", undefined, "source ↗");
    provenance.href = member.provenance_url;
    provenance.target = "_blank";
    provenance.rel = "noopener";
    provenance.setAttribute("data-testid", "member-provenance");
    sourceCell.appendChild(provenance);
    row.appendChild(sourceCell);

    return row;
  }

  private async toggleSelection(
    clusterId: string,
    nativeId: string,
    checkbox: HTMLInputElement,
    row: HTMLTableRowElement,
  ): Promise<void> {
    const requested = checkbox.checked; // the click already flipped it
    await optimistic({
      apply: () => {
        row.classList.add("pending"); // unsaved toggles are visually distinct
        return !requested;
      },
      remote: () => this.api.setSelection(clusterId, nativeId, requested),
      acknowledge: (ack) => {
        checkbox.checked = ack.selected;
        row.classList.remove("pending");
        row.classList.toggle("deselected", !ack.selected);
      },
      revert: (previous) => {
        checkbox.checked = previous;
        row.classList.remove("pending");
      },
      onError: (error) => this.toast(`Could not save selection: ${error.message}`),
    });
  }

  async showRecord(globalId: string): Promise<void> {
    let record: SourceRecordView;
    try {
      record = await this.api.getRecord(globalId);
    } catch (err) {
      if (err instanceof ApiError && err.notFound) {
        this.renderNotFound("Record", globalId);
      } else {
        this.renderError(String((err as Error).message), () =>
          void this.showRecord(globalId),
        );
      }
      return;
    }

    const container = this.clear();
    const panel = el("section", "panel record");
    panel.setAttribute("data-testid", "record-panel");
    panel.appendChild(el("h2", undefined, record.title));
    panel.appendChild(el("p", undefined, record.contributors.join("; ")));
    panel.appendChild(
      el("p", "muted", `${record.global_id}` + (record.work_id ? ` · work ${record.work_id}` : "")),
    );

    const identifiers = el("dl", "identifier-list");
    identifiers.setAttribute("data-testid", "record-identifiers");
    for (const [key, values] of Object.entries(record.identifiers)) {
      if (values.length === 0) continue;
      identifiers.appendChild(el("dt", undefined, key));
      identifiers.appendChild(el("dd", undefined, values.join(", ")));
    }
    panel.appendChild(identifiers);

    for (const [key, value] of Object.entries(record.metadata)) {
      panel.appendChild(
        el("p", "metadata", `${key}: ${Array.isArray(value) ? value.join("; ") : String(value)}`),
      );
    }

    const provenance = el("a", undefined, "View original source record ↗");
    provenance.href = record.provenance_url;
    provenance.target = "_blank";
    provenance.rel = "noopener";
    provenance.setAttribute("data-testid", "record-provenance");
    panel.appendChild(provenance);

    container.appendChild(panel);
  }
}
