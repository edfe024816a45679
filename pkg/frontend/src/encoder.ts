/**
 * Deterministic tile encoders. The default "proj" encoder resizes the tile,
 * normalizes to [0, 1] and applies a fixed seeded Gaussian random projection
 * — a weight-free stand-in for a pretrained pooling layer with the same
 * interface contract: fixed output width, bit-reproducible embeddings, and
 * a tag that pins the preprocessing.
 */

export interface EncoderSpec {
  name: string
  inputSize: number
  outputDim: number
  seed: number
}

export interface RgbImage {
  width: number
  height: number
  /** RGB triples, row-major */
  pixels: Uint8Array
}

export function encoderTag(spec: EncoderSpec): string {
  return `${spec.name}-in${spec.inputSize}-d${spec.outputDim}-s${spec.seed}`
}

/** mulberry32: tiny deterministic PRNG, enough for a fixed projection. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a = (a + 0x6d2b79f5) >>> 0
    let t = a
    t = Math.imul(t ^ (t >>> 15), t | 1)
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61)
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

function gaussianMatrix(rows: number, cols: number, seed: number): Float64Array {
  const rand = mulberry32(seed)
  const out = new Float64Array(rows * cols)
  // Box-Muller, pairs consumed in a fixed order
  for (let i = 0; i < out.length; i += 2) {
    const u1 = 1 - rand()
    const u2 = rand()
    const r = Math.sqrt(-2 * Math.log(u1))
    out[i] = r * Math.cos(2 * Math.PI * u2)
    if (i + 1 < out.length) {
      out[i + 1] = r * Math.sin(2 * Math.PI * u2)
    }
  }
  return out
}

/** Bilinear resize to size x size, channels kept separate. */
export function resizeBilinear(img: RgbImage, size: number): Float64Array {
  const out = new Float64Array(size * size * 3)
  const sx = img.width / size
  const sy = img.height / size
  for (let y = 0; y < size; y++) {
    const fy = Math.min((y + 0.5) * sy - 0.5, img.height - 1)
    const y0 = Math.max(Math.floor(fy), 0)
    const y1 = Math.min(y0 + 1, img.height - 1)
    const wy = Math.max(fy - y0, 0)
    for (let x = 0; x < size; x++) {
      const fx = Math.min((x + 0.5) * sx - 0.5, img.width - 1)
      const x0 = Math.max(Math.floor(fx), 0)
      const x1 = Math.min(x0 + 1, img.width - 1)
      const wx = Math.max(fx - x0, 0)
      for (let c = 0; c < 3; c++) {
        const p00 = img.pixels[(y0 * img.width + x0) * 3 + c]
        const p01 = img.pixels[(y0 * img.width + x1) * 3 + c]
        const p10 = img.pixels[(y1 * img.width + x0) * 3 + c]
        const p11 = img.pixels[(y1 * img.width + x1) * 3 + c]
        const top = p00 * (1 - wx) + p01 * wx
        const bottom = p10 * (1 - wx) + p11 * wx
        out[(y * size + x) * 3 + c] = (top * (1 - wy) + bottom * wy) / 255
      }
    }
  }
  return out
}

export class ProjectionEncoder {
  readonly spec: EncoderSpec
  readonly tag: string
  private readonly weights: Float64Array
  private readonly inputLen: number

  constructor(spec: Partial<EncoderSpec> = {}) {
    this.spec = {
      name: spec.name ?? 'proj',
      inputSize: spec.inputSize ?? 32,
      outputDim: spec.outputDim ?? 256,
      seed: spec.seed ?? 0,
    }
    this.tag = encoderTag(this.spec)
    this.inputLen = this.spec.inputSize * this.spec.inputSize * 3
    this.weights = gaussianMatrix(
      this.spec.outputDim,
      this.inputLen,
      this.spec.seed,
    )
  }

  get outputDim(): number {
    return this.spec.outputDim
  }

  encode(img: RgbImage): Float32Array {
    const features = resizeBilinear(img, this.spec.inputSize)
    const out = new Float32Array(this.spec.outputDim)
    const scale = 1 / Math.sqrt(this.inputLen)
    for (let j = 0; j < this.spec.outputDim; j++) {
      let acc = 0
      const base = j * this.inputLen
      for (let k = 0; k < this.inputLen; k++) {
        acc += this.weights[base + k] * features[k]
      }
      out[j] = acc * scale
    }
    return out
  }
}
