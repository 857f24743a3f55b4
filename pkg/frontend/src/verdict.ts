/**
 * Report document -> verdict view. Pure field selection: severity and every
 * count come straight from the fetched JSON (the server is the single
 * scorer), so each displayed value is traceable to a document field.
 */

import type { NetworkFinding, ReportDocument } from "./types"

export type VerdictView = {
  id: string | null
  name: string
  version: string
  severityLevel: string
  severityReasons: string[]
  extraCount: number
  extraPermissions: string[]
  exemptIgnored: string[]
  network: NetworkFinding[]
  cspEnforced: boolean
  indeterminate: boolean
  warnings: string[]
  scannedAt: string
}

export function toVerdictView(doc: ReportDocument): VerdictView {
  return {
    id: doc.extension_id,
    name: doc.name,
    version: doc.version,
    severityLevel: doc.severity.level,
    severityReasons: doc.severity.reasons,
    extraCount: doc.overprivilege.extra_count,
    extraPermissions: doc.overprivilege.extra,
    exemptIgnored: doc.overprivilege.exempt_ignored,
    network: doc.network,
    cspEnforced: doc.csp.enforced,
    indeterminate: doc.overprivilege.indeterminate,
    warnings: doc.warnings,
    scannedAt: doc.scanned_at,
  }
}

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
}

function list(items: string[]): string {
  if (items.length === 0) return "<em>none</em>"
  return items.map((item) => `<code>${escapeHtml(item)}</code>`).join(", ")
}

export function severityBadgeClass(level: string): string {
  return `badge badge--${level}`
}

/** Render the verdict as an HTML fragment (no external templating). */
export function renderVerdictHtml(view: VerdictView): string {
  const rows = view.network
    .map(
      (f) => `<tr>
  <td>${escapeHtml(f.source_file)}</td>
  <td>${escapeHtml(f.url)}</td>
  <td>${escapeHtml(f.scheme)}</td>
  <td>${escapeHtml(f.kind)}</td>
</tr>`,
    )
    .join("\n")
  const networkTable =
    view.network.length === 0
      ? "<p>No network findings.</p>"
      : `<table class="network">
<thead><tr><th>file</th><th>url</th><th>scheme</th><th>kind</th></tr></thead>
<tbody>
${rows}
</tbody>
</table>`
  const reasons =
    view.severityReasons.length === 0
      ? ""
      : `<ul class="reasons">${view.severityReasons
          .map((r) => `<li>${escapeHtml(r)}</li>`)
          .join("")}</ul>`
  const warnings =
    view.warnings.length === 0
      ? ""
      : `<details><summary>${view.warnings.length} scan warning(s)</summary>
<ul>${view.warnings.map((w) => `<li>${escapeHtml(w)}</li>`).join("")}</ul>
</details>`
  return `<article class="verdict">
<h2>${escapeHtml(view.name)} <small>${escapeHtml(view.version)}</small></h2>
<p class="ext-id">${escapeHtml(view.id ?? "(no extension id)")}</p>
<p><span class="${severityBadgeClass(view.severityLevel)}">${escapeHtml(
    view.severityLevel,
  )}</span></p>
${reasons}
<dl>
<dt>Extra permissions (${view.extraCount})</dt><dd>${list(view.extraPermissions)}</dd>
<dt>Exempt (unused but harmless)</dt><dd>${list(view.exemptIgnored)}</dd>
<dt>CSP</dt><dd>${view.cspEnforced ? "enforced" : "not enforced"}</dd>
${view.indeterminate ? "<dt>Note</dt><dd>dynamic code present; usage inference is a lower bound</dd>" : ""}
</dl>
<h3>Network findings</h3>
${networkTable}
${warnings}
<p class="scanned-at">scanned ${escapeHtml(view.scannedAt)}</p>
</article>`
}
