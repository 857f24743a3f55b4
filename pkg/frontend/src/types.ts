/**
 * Mirrors the canonical report document the scan service stores and serves.
 * Field names match the JSON schema exactly; the UI never re-derives any of
 * these values.
 */

export type CspStatus = {
  enforced: boolean
  effective_policy: string
}

export type Overprivilege = {
  declared: string[]
  used: string[]
  exempt_ignored: string[]
  extra: string[]
  extra_count: number
  undeclared_used: string[]
  indeterminate: boolean
}

export type NetworkFinding = {
  source_file: string
  url: string
  scheme: string
  kind: string
}

export type SeverityInfo = {
  level: "none" | "low" | "medium" | "high"
  reasons: string[]
}

export type ReportDocument = {
  extension_id: string | null
  name: string
  version: string
  manifest_version: number
  csp: CspStatus
  overprivilege: Overprivilege
  network: NetworkFinding[]
  host_patterns: string[]
  optional_permissions: string[]
  warnings: string[]
  partial: boolean
  severity: SeverityInfo
  scanner_version: string
  scanned_at: string
}

export type ApiError = {
  code: string
  message: string
}
