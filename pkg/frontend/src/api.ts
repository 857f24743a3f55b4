/**
 * Thin client for the report service. The base URL is configurable via
 * `window.EXTSCAN_API_BASE`; empty string means same-origin.
 */

import type { ApiError, ReportDocument } from "./types"

export type FetchFn = typeof fetch

export function apiBaseUrl(): string {
  const configured = (globalThis as { EXTSCAN_API_BASE?: unknown }).EXTSCAN_API_BASE
  return typeof configured === "string" ? configured.replace(/\/$/, "") : ""
}

export type LookupResponse =
  | { status: "ok"; doc: ReportDocument }
  | { status: "not_found" }

export async function getLatestReport(
  id: string,
  fetchFn: FetchFn = fetch,
  base: string = apiBaseUrl(),
  signal?: AbortSignal,
): Promise<LookupResponse> {
  const response = await fetchFn(`${base}/api/v1/reports/${id}/latest`, { signal })
  if (response.status === 404) {
    return { status: "not_found" }
  }
  if (!response.ok) {
    throw new Error(`lookup failed: HTTP ${response.status}`)
  }
  return { status: "ok", doc: (await response.json()) as ReportDocument }
}

export type ScanResponse =
  | { status: "ok"; doc: ReportDocument }
  | { status: "rejected"; error: ApiError }

export async function postScan(
  body: BodyInit,
  fetchFn: FetchFn = fetch,
  base: string = apiBaseUrl(),
  signal?: AbortSignal,
): Promise<ScanResponse> {
  const response = await fetchFn(`${base}/api/v1/scan`, {
    method: "POST",
    headers: { "content-type": "application/octet-stream" },
    body,
    signal,
  })
  if (response.status === 422 || response.status === 413) {
    return { status: "rejected", error: (await response.json()) as ApiError }
  }
  if (!response.ok) {
    throw new Error(`scan failed: HTTP ${response.status}`)
  }
  return { status: "ok", doc: (await response.json()) as ReportDocument }
}

/** One in-flight request at a time: starting a new one aborts the previous. */
export class RequestGate {
  private current: AbortController | null = null

  begin(): AbortSignal {
    this.current?.abort()
    this.current = new AbortController()
    return this.current.signal
  }
}
