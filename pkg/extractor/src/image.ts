/**
 * Image decoding and model preprocessing.
 *
 * JPEG and PNG decode to RGBA; the alpha channel is dropped, grayscale
 * sources arrive channel-replicated from the decoders. Preprocessing is
 * the standard pipeline of the pretrained backbone family: bilinear
 * resize to the model's input size, scale to [0, 1], then per-channel
 * mean/std normalization.
 */

import * as tf from '@tensorflow/tfjs'
import { readFileSync } from 'fs'
import jpeg from 'jpeg-js'
import { PNG } from 'pngjs'

export class UnreadableImage extends Error {}

// standard normalization constants of the pretrained backbone family
export const CHANNEL_MEAN = [0.485, 0.456, 0.406]
export const CHANNEL_STD = [0.229, 0.224, 0.225]

export const IMAGE_EXTENSIONS = new Set(['.jpg', '.jpeg', '.png'])

export interface DecodedImage {
  width: number
  height: number
  /** RGB interleaved, values 0..255 */
  rgb: Uint8Array
}

export function decodeImage(path: string): DecodedImage {
  let data: Buffer
  try {
    data = readFileSync(path)
  } catch (err) {
    throw new UnreadableImage(`cannot read ${path}: ${(err as Error).message}`)
  }
  try {
    if (data.length >= 8 && data.readUInt32BE(0) === 0x89504e47) {
      const png = PNG.sync.read(data) // RGBA, grayscale already replicated
      return { width: png.width, height: png.height, rgb: dropAlpha(png.data, png.width * png.height) }
    }
    const img = jpeg.decode(data, { useTArray: true, formatAsRGBA: true })
    return { width: img.width, height: img.height, rgb: dropAlpha(img.data, img.width * img.height) }
  } catch (err) {
    throw new UnreadableImage(`cannot decode ${path}: ${(err as Error).message}`)
  }
}

function dropAlpha(rgba: Uint8Array | Buffer, pixels: number): Uint8Array {
  const rgb = new Uint8Array(pixels * 3)
  for (let p = 0; p < pixels; p++) {
    rgb[p * 3] = rgba[p * 4]
    rgb[p * 3 + 1] = rgba[p * 4 + 1]
    rgb[p * 3 + 2] = rgba[p * 4 + 2]
  }
  return rgb
}

/** Decoded image -> normalized [size, size, 3] float tensor. */
export function toModelInput(image: DecodedImage, size: number): tf.Tensor3D {
  return tf.tidy(() => {
    const pixels = tf.tensor3d(image.rgb, [image.height, image.width, 3], 'float32')
    const resized = tf.image.resizeBilinear(pixels, [size, size])
    const scaled = resized.div(255)
    return scaled.sub(CHANNEL_MEAN).div(CHANNEL_STD)
  })
}
