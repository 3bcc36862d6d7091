/**
 * File-download helpers. The CSV path never touches the bytes; the
 * figure path rasterizes the live SVG through a canvas.
 */

/** Trigger a browser download of the given blob. */
export function saveBlob(name: string, blob: Blob): void {
  const anchor = document.createElement("a");
  anchor.href = URL.createObjectURL(blob);
  anchor.download = name;
  document.body.appendChild(anchor);
  anchor.click();
  anchor.remove();
  // Revoke later so the click's navigation can still read the URL.
  setTimeout(() => URL.revokeObjectURL(anchor.href), 1000);
}

/** Draw serialized SVG markup onto a canvas and encode it as a PNG. */
export async function rasterizeSvg(markup: string, width: number, height: number): Promise<Blob> {
  const url = URL.createObjectURL(new Blob([markup], { type: "image/svg+xml" }));
  try {
    const image = new Image();
    await new Promise<void>((resolve, reject) => {
      image.onload = () => resolve();
      image.onerror = () => reject(new Error("figure render failed"));
      image.src = url;
    });
    const canvas = document.createElement("canvas");
    // 2x raster for crisp text on dense displays
    canvas.width = width * 2;
    canvas.height = height * 2;
    const ctx = canvas.getContext("2d");
    if (ctx === null) {
      throw new Error("canvas 2d context unavailable");
    }
    ctx.fillStyle = "#ffffff";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.drawImage(image, 0, 0, canvas.width, canvas.height);
    return await new Promise<Blob>((resolve, reject) => {
      canvas.toBlob(
        (blob) => (blob !== null ? resolve(blob) : reject(new Error("raster encode failed"))),
        "image/png",
      );
    });
  } finally {
    URL.revokeObjectURL(url);
  }
}
