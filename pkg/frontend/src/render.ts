// Frame presentation: raw f32 payloads are tone-mapped with a fixed [0, 1]
// clamp into RGBA bytes; PNG payloads bypass this entirely.

export function toneMapToRgba(frame: Float32Array, width: number,
                              height: number): Uint8ClampedArray<ArrayBuffer> {
  if (frame.length !== width * height * 3) {
    throw new Error(`frame has ${frame.length} floats, expected ${width * height * 3}`);
  }
  const out = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
  for (let p = 0; p < width * height; p++) {
    for (let c = 0; c < 3; c++) {
      const v = Math.min(1, Math.max(0, frame[p * 3 + c]));
      out[p * 4 + c] = Math.round(v * 255);
    }
    out[p * 4 + 3] = 255;
  }
  return out;
}
