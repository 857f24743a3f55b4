/**
 * DOM wiring for the checker page. Stateless beyond the current view:
 * every render replaces the result container from a fresh FlowResult.
 */

import { RequestGate, apiBaseUrl } from "./api"
import { lookupFlow, uploadFlow, type FlowResult } from "./flows"
import { renderVerdictHtml } from "./verdict"

const gate = new RequestGate()

function resultHtml(result: FlowResult): string {
  switch (result.kind) {
    case "verdict":
      return renderVerdictHtml(result.view)
    case "not_found":
      return `<p class="notice">Not yet analysed. Upload the package below to scan it now.</p>`
    case "invalid":
      return `<p class="error">${result.message}</p>`
    case "rejected":
      return `<p class="error">Scan rejected (${result.code}): ${result.message}</p>`
    case "error":
      return `<p class="error">Request failed: ${result.message}. <button id="retry">Retry</button></p>`
  }
}

function render(result: FlowResult, rerun: () => void): void {
  const container = document.getElementById("result")
  if (!container) return
  container.innerHTML = resultHtml(result)
  document.getElementById("retry")?.addEventListener("click", rerun)
}

function wire(): void {
  const idInput = document.getElementById("ext-id") as HTMLInputElement
  const lookupButton = document.getElementById("lookup") as HTMLButtonElement
  const fileInput = document.getElementById("pkg-file") as HTMLInputElement

  const runLookup = async () => {
    const result = await lookupFlow(idInput.value, {
      apiBase: apiBaseUrl(),
      signal: gate.begin(),
    })
    render(result, runLookup)
  }

  const runUpload = async () => {
    const file = fileInput.files?.[0]
    if (!file) return
    const result = await uploadFlow(file, { apiBase: apiBaseUrl(), signal: gate.begin() })
    render(result, runUpload)
  }

  lookupButton.addEventListener("click", runLookup)
  idInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter") runLookup()
  })
  fileInput.addEventListener("change", runUpload)
}

document.addEventListener("DOMContentLoaded", wire)
