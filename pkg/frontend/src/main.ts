// Bootstrap: a small launch form, then the session screen.

import { ApiClient } from "./api";
import { startSession } from "./app";

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "";
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("#app missing");
  const api = new ApiClient(apiBase());

  const launcher = document.createElement("form");
  launcher.className = "launcher";
  launcher.innerHTML = `
    <h2>New departure design</h2>
    <label>airport <input name="icao" value="ZUUU" size="6"></label>
    <label>runway <input name="runway" value="02L" size="5"></label>
    <label>destination <input name="destination" value="GURET" size="8"></label>
    <label><input type="checkbox" name="interactive" checked> interactive (pause each round)</label>
    <button type="submit">Start design</button>
    <span class="launch-error" role="alert"></span>
  `;
  root.appendChild(launcher);

  launcher.addEventListener("submit", async (event) => {
    event.preventDefault();
    const value = (name: string) =>
      (launcher.querySelector(`[name="${name}"]`) as HTMLInputElement).value.trim();
    const interactive = (launcher.querySelector('[name="interactive"]') as HTMLInputElement)
      .checked;
    const errorBox = launcher.querySelector(".launch-error") as HTMLElement;
    try {
      const screenRoot = document.createElement("div");
      root.appendChild(screenRoot);
      await startSession(
        api,
        {
          icao: value("icao"),
          runway: value("runway"),
          destination: value("destination"),
          interactive,
        },
        screenRoot,
      );
      launcher.remove();
    } catch (error) {
      errorBox.textContent = String(error);
    }
  });
}

void boot();
