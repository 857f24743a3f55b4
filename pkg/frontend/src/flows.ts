/**
 * The two user flows of the checker page, as pure async functions that
 * return a typed view state. DOM wiring lives in main.ts; these are what
 * the tests drive.
 */

import { getLatestReport, postScan, type FetchFn } from "./api"
import type { ReportDocument } from "./types"
import { validateExtensionId, validateUpload } from "./validate"
import { toVerdictView, type VerdictView } from "./verdict"

export type FlowResult =
  | { kind: "invalid"; message: string }
  | { kind: "not_found"; id: string }
  | { kind: "verdict"; view: VerdictView; raw: ReportDocument }
  | { kind: "rejected"; code: string; message: string }
  | { kind: "error"; message: string; retryable: true }

export type FlowOptions = {
  fetchFn?: FetchFn
  apiBase?: string
  signal?: AbortSignal
}

/** Look up the latest stored verdict for an extension ID. */
export async function lookupFlow(id: string, opts: FlowOptions = {}): Promise<FlowResult> {
  const check = validateExtensionId(id)
  if (!check.valid) {
    return { kind: "invalid", message: check.error ?? "invalid ID" }
  }
  try {
    const result = await getLatestReport(
      id.trim(),
      opts.fetchFn ?? fetch,
      opts.apiBase ?? "",
      opts.signal,
    )
    if (result.status === "not_found") {
      return { kind: "not_found", id: id.trim() }
    }
    return { kind: "verdict", view: toVerdictView(result.doc), raw: result.doc }
  } catch (err) {
    return { kind: "error", message: String(err), retryable: true }
  }
}

/** Upload a package and render the scan verdict. */
export async function uploadFlow(
  file: { size: number; arrayBuffer(): Promise<ArrayBuffer> },
  opts: FlowOptions = {},
): Promise<FlowResult> {
  const check = validateUpload(file)
  if (!check.valid) {
    return { kind: "invalid", message: check.error ?? "invalid file" }
  }
  try {
    const body = await file.arrayBuffer()
    const result = await postScan(body, opts.fetchFn ?? fetch, opts.apiBase ?? "", opts.signal)
    if (result.status === "rejected") {
      return { kind: "rejected", code: result.error.code, message: result.error.message }
    }
    return { kind: "verdict", view: toVerdictView(result.doc), raw: result.doc }
  } catch (err) {
    return { kind: "error", message: String(err), retryable: true }
  }
}
