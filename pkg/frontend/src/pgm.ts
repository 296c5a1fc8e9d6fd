// Decoder for the binary PGM (P5) snapshots the service stores per event.

export interface GrayImage {
  width: number;
  height: number;
  pixels: Uint8Array;
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

/** Parse a binary PGM: "P5", width, height, maxval as ASCII tokens, one
 *  whitespace byte, then width*height gray bytes. */
export function parsePgm(bytes: Uint8Array): GrayImage {
  let pos = 0;

  const token = (): string => {
    while (pos < bytes.length && isSpace(bytes[pos])) pos++;
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos])) pos++;
    if (start === pos) throw new Error('pgm: truncated header');
    return String.fromCharCode(...bytes.subarray(start, pos));
  };

  if (token() !== 'P5') throw new Error('pgm: not a binary PGM (bad magic)');
  const width = Number(token());
  const height = Number(token());
  const maxval = Number(token());
  if (!Number.isInteger(width) || !Number.isInteger(height) || width <= 0 || height <= 0) {
    throw new Error('pgm: bad dimensions');
  }
  if (!Number.isInteger(maxval) || maxval <= 0 || maxval > 255) {
    throw new Error(`pgm: unsupported maxval ${maxval}`);
  }
  pos++; // the single whitespace byte after maxval
  const expected = width * height;
  const pixels = bytes.subarray(pos, pos + expected);
  if (pixels.length !== expected) {
    throw new Error(`pgm: expected ${expected} pixels, got ${pixels.length}`);
  }
  return { width, height, pixels: new Uint8Array(pixels) };
}

/** Expand to RGBA for a canvas ImageData buffer. */
export function toRgba(image: GrayImage): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(image.width * image.height * 4);
  for (let i = 0; i < image.pixels.length; i++) {
    const g = image.pixels[i];
    out[i * 4] = g;
    out[i * 4 + 1] = g;
    out[i * 4 + 2] = g;
    out[i * 4 + 3] = 255;
  }
  return out;
}
