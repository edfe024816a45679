import { readFileSync } from 'node:fs'

export interface PairRow {
  tileId: string
  realPath: string
  virtualPath: string
}

/** Minimal CSV reader for the pair manifests the primary toolkit emits
 * (plain comma-separated values, no quoting in path columns). */
export function readPairManifest(path: string): PairRow[] {
  const text = readFileSync(path, 'utf-8')
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0)
  if (lines.length === 0) {
    throw new Error(`${path}: empty manifest`)
  }
  const header = lines[0].split(',')
  const col = (name: string) => {
    const i = header.indexOf(name)
    if (i < 0) {
      throw new Error(`${path}: missing required column ${name}`)
    }
    return i
  }
  const tileCol = col('tile_id')
  const realCol = col('real_path')
  const virtCol = col('virtual_path')
  const rows: PairRow[] = []
  const seen = new Set<string>()
  for (const line of lines.slice(1)) {
    const cells = line.split(',')
    const tileId = cells[tileCol]
    if (seen.has(tileId)) {
      throw new Error(`${path}: duplicate tile_id ${tileId}`)
    }
    seen.add(tileId)
    rows.push({
      tileId,
      realPath: cells[realCol],
      virtualPath: cells[virtCol],
    })
  }
  return rows
}
