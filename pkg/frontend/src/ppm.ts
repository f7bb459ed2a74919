// Minimal binary PPM (P6) handling for uploads, previews, and sample inputs.

export interface RawImage {
  width: number;
  height: number;
  pixels: Uint8Array; // RGB triples, row-major
}

export function encodePpm(img: RawImage): Uint8Array {
  const header = `P6\n${img.width} ${img.height}\n255\n`;
  const head = new TextEncoder().encode(header);
  const out = new Uint8Array(head.length + img.pixels.length);
  out.set(head, 0);
  out.set(img.pixels, head.length);
  return out;
}

export function decodePpm(data: Uint8Array): RawImage {
  if (data[0] !== 0x50 || data[1] !== 0x36) throw new Error("not a P6 PPM");
  let pos = 2;
  const fields: number[] = [];
  while (fields.length < 3) {
    while (pos < data.length && isSpace(data[pos])) pos++;
    if (data[pos] === 0x23) {
      while (pos < data.length && data[pos] !== 0x0a) pos++;
      continue;
    }
    let start = pos;
    while (pos < data.length && !isSpace(data[pos])) pos++;
    const token = new TextDecoder().decode(data.subarray(start, pos));
    const value = Number(token);
    if (!Number.isInteger(value)) throw new Error(`bad PPM header token ${token}`);
    fields.push(value);
  }
  pos++; // single whitespace after maxval
  const [width, height, maxval] = fields;
  if (maxval !== 255) throw new Error(`unsupported maxval ${maxval}`);
  const need = width * height * 3;
  const pixels = data.subarray(pos, pos + need);
  if (pixels.length < need) throw new Error("truncated PPM raster");
  return { width, height, pixels: new Uint8Array(pixels) };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

export function bytesToBase64(bytes: Uint8Array): string {
  let binary = "";
  const chunk = 0x8000;
  for (let i = 0; i < bytes.length; i += chunk) {
    binary += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(binary);
}

export function base64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
  return bytes;
}

// Built-in sample input so image ports can be fed without leaving the browser.
export function sampleImage(size = 32): RawImage {
  const pixels = new Uint8Array(size * size * 3);
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      const i = (y * size + x) * 3;
      pixels[i] = Math.round((255 * x) / (size - 1));
      pixels[i + 1] = Math.round((255 * y) / (size - 1));
      pixels[i + 2] = Math.round(255 * Math.abs(Math.sin((x + 2 * y) / 6)));
    }
  }
  return { width: size, height: size, pixels };
}

export function drawToCanvas(img: RawImage, canvas: HTMLCanvasElement, scale = 3): void {
  canvas.width = img.width * scale;
  canvas.height = img.height * scale;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const imageData = ctx.createImageData(img.width, img.height);
  for (let i = 0; i < img.width * img.height; i++) {
    imageData.data[i * 4] = img.pixels[i * 3];
    imageData.data[i * 4 + 1] = img.pixels[i * 3 + 1];
    imageData.data[i * 4 + 2] = img.pixels[i * 3 + 2];
    imageData.data[i * 4 + 3] = 255;
  }
  const off = document.createElement("canvas");
  off.width = img.width;
  off.height = img.height;
  off.getContext("2d")?.putImageData(imageData, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}
