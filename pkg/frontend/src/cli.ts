#!/usr/bin/env node
/**
 * Feature export CLI: encode a tile manifest into a FEAT1 file and verify
 * existing files. Exit codes mirror the primary toolkit: 0 clean,
 * 1 usage/load error, 2 partial per-tile failures.
 */

import { createHash } from 'node:crypto'
import { realpathSync } from 'node:fs'
import { fileURLToPath } from 'node:url'
import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'

import { ProjectionEncoder } from './encoder.js'
import { readFeatures, writeFeatures } from './feat1.js'
import { readPairManifest } from './manifest.js'
import { readPng } from './png.js'

export interface ExportOptions {
  manifest: string
  out: string
  source: 'real' | 'virtual'
  dim: number
  inputSize: number
  seed: number
  quiet?: boolean
}

export interface ExportResult {
  n: number
  d: number
  tag: string
  skipped: string[]
}

export function runExport(opts: ExportOptions): ExportResult {
  const rows = readPairManifest(opts.manifest)
  const encoder = new ProjectionEncoder({
    outputDim: opts.dim,
    inputSize: opts.inputSize,
    seed: opts.seed,
  })
  const vectors: Float32Array[] = []
  const ids: string[] = []
  const skipped: string[] = []
  for (const row of rows) {
    const path = opts.source === 'real' ? row.realPath : row.virtualPath
    let img
    try {
      img = readPng(path)
    } catch (err) {
      skipped.push(`${row.tileId}: ${(err as Error).message}`)
      continue
    }
    vectors.push(encoder.encode(img))
    ids.push(row.tileId)
  }
  if (vectors.length === 0) {
    throw new Error('no tile could be encoded')
  }
  const data = new Float32Array(vectors.length * encoder.outputDim)
  vectors.forEach((vec, i) => data.set(vec, i * encoder.outputDim))
  writeFeatures(opts.out, {
    data,
    n: vectors.length,
    d: encoder.outputDim,
    encoderTag: encoder.tag,
    ids,
  })
  return { n: vectors.length, d: encoder.outputDim, tag: encoder.tag, skipped }
}

export interface VerifySummary {
  n: number
  d: number
  tag: string
  checksum: string
}

export function runVerify(path: string): VerifySummary {
  const fs = readFeatures(path)
  const payload = Buffer.alloc(fs.data.length * 4)
  for (let i = 0; i < fs.data.length; i++) {
    payload.writeFloatLE(fs.data[i], i * 4)
  }
  const checksum = createHash('sha256').update(payload).digest('hex')
  return { n: fs.n, d: fs.d, tag: fs.encoderTag, checksum }
}

function main(): void {
  yargs(hideBin(process.argv))
    .command(
      'export',
      'Encode manifest tiles into a FEAT1 feature file',
      (y) =>
        y
          .option('manifest', { type: 'string', demandOption: true })
          .option('out', { type: 'string', demandOption: true })
          .option('source', {
            choices: ['real', 'virtual'] as const,
            default: 'real' as const,
          })
          .option('dim', { type: 'number', default: 256 })
          .option('input-size', { type: 'number', default: 32 })
          .option('seed', { type: 'number', default: 0 })
          .option('quiet', { type: 'boolean', default: false }),
      (argv) => {
        let result: ExportResult
        try {
          result = runExport({
            manifest: argv.manifest,
            out: argv.out,
            source: argv.source,
            dim: argv.dim,
            inputSize: argv['input-size'],
            seed: argv.seed,
          })
        } catch (err) {
          console.error(`error: ${(err as Error).message}`)
          process.exit(1)
        }
        if (!argv.quiet) {
          console.error(
            `wrote ${argv.out} (n=${result.n}, d=${result.d}, ` +
              `tag=${result.tag}, ${result.skipped.length} skipped)`,
          )
        }
        if (result.skipped.length > 0) {
          for (const item of result.skipped) {
            console.error(`  SKIPPED ${item}`)
          }
          process.exit(2)
        }
      },
    )
    .command(
      'verify <path>',
      'Validate a FEAT1 file and print its summary',
      (y) => y.positional('path', { type: 'string', demandOption: true }),
      (argv) => {
        try {
          const summary = runVerify(argv.path as string)
          console.log(JSON.stringify(summary, null, 2))
        } catch (err) {
          console.error(`error: ${(err as Error).message}`)
          process.exit(1)
        }
      },
    )
    .demandCommand(1)
    .strict()
    .parse()
}

let isDirectRun = false
if (process.argv[1] !== undefined) {
  try {
    isDirectRun = fileURLToPath(import.meta.url) === realpathSync(process.argv[1])
  } catch {
    isDirectRun = false
  }
}

if (isDirectRun) {
  main()
}
