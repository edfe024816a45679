import { readFileSync } from 'node:fs'
import { PNG } from 'pngjs'

import type { RgbImage } from './encoder.js'

export function readPng(path: string): RgbImage {
  const png = PNG.sync.read(readFileSync(path))
  const pixels = new Uint8Array(png.width * png.height * 3)
  for (let i = 0; i < png.width * png.height; i++) {
    pixels[i * 3] = png.data[i * 4]
    pixels[i * 3 + 1] = png.data[i * 4 + 1]
    pixels[i * 3 + 2] = png.data[i * 4 + 2]
  }
  return { width: png.width, height: png.height, pixels }
}
