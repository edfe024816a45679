/**
 * FEAT1 portable feature file format (little-endian):
 *
 *   "FEAT" | version u32 = 1 | n u32 | d u32
 *   | tag_len u16 | tag utf-8
 *   | n*d float32 row-major
 *   | ids_flag u8 [| n x (len u16 | id utf-8)]
 */

import { readFileSync, writeFileSync } from 'node:fs'

export const MAGIC = 'FEAT'
export const VERSION = 1

export interface FeatureSet {
  /** n*d row-major */
  data: Float32Array
  n: number
  d: number
  encoderTag: string
  ids?: string[]
}

export class Feat1Error extends Error {}
export class BadMagic extends Feat1Error {}
export class TruncatedFile extends Feat1Error {}
export class VersionUnsupported extends Feat1Error {}

export function encodeFeatures(fs: FeatureSet): Buffer {
  if (fs.data.length !== fs.n * fs.d) {
    throw new Feat1Error(
      `data length ${fs.data.length} != n*d = ${fs.n * fs.d}`,
    )
  }
  if (fs.ids && fs.ids.length !== fs.n) {
    throw new Feat1Error(`ids length ${fs.ids.length} != n = ${fs.n}`)
  }
  const tag = Buffer.from(fs.encoderTag, 'utf-8')
  const header = Buffer.alloc(4 + 12 + 2)
  header.write(MAGIC, 0, 'ascii')
  header.writeUInt32LE(VERSION, 4)
  header.writeUInt32LE(fs.n, 8)
  header.writeUInt32LE(fs.d, 12)
  header.writeUInt16LE(tag.length, 16)

  const payload = Buffer.alloc(fs.data.length * 4)
  for (let i = 0; i < fs.data.length; i++) {
    payload.writeFloatLE(fs.data[i], i * 4)
  }

  const parts = [header, tag, payload]
  if (!fs.ids) {
    parts.push(Buffer.from([0]))
  } else {
    parts.push(Buffer.from([1]))
    for (const id of fs.ids) {
      const raw = Buffer.from(id, 'utf-8')
      const len = Buffer.alloc(2)
      len.writeUInt16LE(raw.length, 0)
      parts.push(len, raw)
    }
  }
  return Buffer.concat(parts)
}

export function writeFeatures(path: string, fs: FeatureSet): void {
  writeFileSync(path, encodeFeatures(fs))
}

class Reader {
  pos = 0
  constructor(
    private blob: Buffer,
    private path: string,
  ) {}

  take(count: number): Buffer {
    if (this.pos + count > this.blob.length) {
      throw new TruncatedFile(`${this.path}: truncated at byte ${this.pos}`)
    }
    const chunk = this.blob.subarray(this.pos, this.pos + count)
    this.pos += count
    return chunk
  }
}

export function decodeFeatures(blob: Buffer, path = '<buffer>'): FeatureSet {
  const r = new Reader(blob, path)
  if (r.take(4).toString('ascii') !== MAGIC) {
    throw new BadMagic(`${path}: not a FEAT1 file`)
  }
  const head = r.take(12)
  const version = head.readUInt32LE(0)
  if (version !== VERSION) {
    throw new VersionUnsupported(`${path}: unsupported version ${version}`)
  }
  const n = head.readUInt32LE(4)
  const d = head.readUInt32LE(8)
  const tagLen = r.take(2).readUInt16LE(0)
  const encoderTag = r.take(tagLen).toString('utf-8')
  const payload = r.take(4 * n * d)
  const data = new Float32Array(n * d)
  for (let i = 0; i < data.length; i++) {
    data[i] = payload.readFloatLE(i * 4)
  }
  const idsFlag = r.take(1)[0]
  let ids: string[] | undefined
  if (idsFlag) {
    ids = []
    for (let i = 0; i < n; i++) {
      const len = r.take(2).readUInt16LE(0)
      ids.push(r.take(len).toString('utf-8'))
    }
  }
  return { data, n, d, encoderTag, ids }
}

export function readFeatures(path: string): FeatureSet {
  return decodeFeatures(readFileSync(path), path)
}
