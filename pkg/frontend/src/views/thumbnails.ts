// Thumbnail strip for the selected dataset; missing images fall back to a
// placeholder box so the strip never breaks on absent folders.

import { Store, thumbnailPaths } from "../state";

export class ThumbnailStrip {
  private root: HTMLElement;

  constructor(parent: HTMLElement, private store: Store,
              private resolve: (path: string) => string = (path) => path) {
    this.root = document.createElement("div");
    this.root.className = "thumbnail-strip";
    parent.appendChild(this.root);
    store.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    const state = this.store.state;
    this.root.innerHTML = "";
    const key = state.selected.values().next().value;
    if (key === undefined) return;
    const row = state.cohort.rows.find((r) => r.key === key);
    if (!row) return;

    const caption = document.createElement("div");
    caption.className = "thumbnail-caption";
    caption.textContent = `${row.id} slices`;
    this.root.appendChild(caption);

    for (const path of thumbnailPaths(state, row)) {
      const img = document.createElement("img");
      img.className = "thumbnail";
      img.loading = "lazy";
      img.src = this.resolve(path);
      img.addEventListener("error", () => {
        const placeholder = document.createElement("div");
        placeholder.className = "thumbnail placeholder";
        placeholder.textContent = "no image";
        img.replaceWith(placeholder);
      });
      this.root.appendChild(img);
    }
  }
}
