/**
 * Client-side guards. The backend is the source of truth; these only stop
 * requests that could never succeed (bad ID shape, oversized upload).
 */

// Matches the server's default upload limit (50 MiB).
export const MAX_UPLOAD_BYTES = 50 * 1024 * 1024

const EXTENSION_ID = /^[a-p]{32}$/

export type ValidationResult = {
  valid: boolean
  error?: string
}

/** Extension IDs are exactly 32 chars over the a-p alphabet. */
export function validateExtensionId(id: string): ValidationResult {
  const trimmed = id.trim()
  if (trimmed.length === 0) {
    return { valid: false, error: "Enter an extension ID." }
  }
  if (!EXTENSION_ID.test(trimmed)) {
    return {
      valid: false,
      error: "An extension ID is 32 characters, letters a through p only.",
    }
  }
  return { valid: true }
}

export function validateUpload(file: { size: number }): ValidationResult {
  if (file.size === 0) {
    return { valid: false, error: "File is empty." }
  }
  if (file.size > MAX_UPLOAD_BYTES) {
    const mib = (file.size / (1024 * 1024)).toFixed(1)
    return { valid: false, error: `File is ${mib} MiB; the limit is 50 MiB.` }
  }
  return { valid: true }
}
