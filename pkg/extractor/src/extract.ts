/**
 * The extraction pipeline: image directory tree in, feature archive out.
 *
 * The tree has one subdirectory per class. Classes are emitted in
 * sorted-name order, images in sorted-name order within each class, and
 * sample ids are the image paths relative to the tree root — so two
 * runs over the same inputs produce byte-identical archives.
 *
 * Unreadable images are logged, skipped, and recorded in the manifest
 * meta; a class that yields no vectors at all is fatal.
 */

import * as tf from '@tensorflow/tfjs'
import { readdirSync, statSync } from 'fs'
import { extname, join } from 'path'

import { Backbone, loadBackbone } from './backbone.js'
import { IMAGE_EXTENSIONS, UnreadableImage, decodeImage, toModelInput } from './image.js'
import { ClassArchive, writeArchive } from './npy.js'

export class EmptyClassDir extends Error {}
export class NoClassDirs extends Error {}
export class BadFeatureVector extends Error {}

export interface ExtractionConfig {
  imagesRoot: string
  outputRoot: string
  /** model identifier or local tfjs model directory */
  model: string
  batchSize: number
}

export interface ExtractionSummary {
  classes: Array<{ name: string; samples: number }>
  dimension: number
  skipped: string[]
}

type Logger = (message: string) => void

function listClassDirs(root: string): string[] {
  const dirs = readdirSync(root)
    .filter((name) => statSync(join(root, name)).isDirectory())
    .sort()
  if (dirs.length === 0) {
    throw new NoClassDirs(`${root} has no class subdirectories`)
  }
  return dirs
}

function listImages(root: string, className: string): string[] {
  return readdirSync(join(root, className))
    .filter((name) => IMAGE_EXTENSIONS.has(extname(name).toLowerCase()))
    .sort()
}

async function extractClass(
  backbone: Backbone,
  cfg: ExtractionConfig,
  className: string,
  skipped: string[],
  log: Logger,
): Promise<ClassArchive> {
  const files = listImages(cfg.imagesRoot, className)
  if (files.length === 0) {
    throw new EmptyClassDir(`class directory '${className}' has no images`)
  }

  const sampleIds: string[] = []
  const rows: Float64Array[] = []
  for (let start = 0; start < files.length; start += cfg.batchSize) {
    const batchFiles = files.slice(start, start + cfg.batchSize)
    const inputs: tf.Tensor3D[] = []
    const batchIds: string[] = []
    for (const file of batchFiles) {
      const relative = `${className}/${file}`
      try {
        const image = decodeImage(join(cfg.imagesRoot, className, file))
        inputs.push(toModelInput(image, backbone.inputSize))
        batchIds.push(relative)
      } catch (err) {
        if (!(err instanceof UnreadableImage)) throw err
        log(`skipping ${relative}: ${err.message}`)
        skipped.push(`skipped: ${relative} (${err.message})`)
      }
    }
    if (inputs.length === 0) continue

    const batch = tf.stack(inputs) as tf.Tensor4D
    inputs.forEach((t) => t.dispose())
    const features = backbone.forward(batch)
    batch.dispose()
    const data = await features.data()
    const [n, d] = features.shape
    features.dispose()

    for (let i = 0; i < n; i++) {
      const row = new Float64Array(d)
      let norm2 = 0
      for (let k = 0; k < d; k++) {
        const v = data[i * d + k]
        if (!Number.isFinite(v)) {
          throw new BadFeatureVector(`${batchIds[i]}: non-finite feature value`)
        }
        row[k] = v
        norm2 += v * v
      }
      if (norm2 === 0) {
        throw new BadFeatureVector(`${batchIds[i]}: zero-norm feature vector (dead input)`)
      }
      rows.push(row)
      sampleIds.push(batchIds[i])
    }
  }

  if (rows.length === 0) {
    throw new EmptyClassDir(`class directory '${className}' produced no usable images`)
  }
  const vectors = new Float64Array(rows.length * backbone.featureLength)
  rows.forEach((row, i) => vectors.set(row, i * backbone.featureLength))
  return { name: className, sampleIds, vectors }
}

export async function extract(
  cfg: ExtractionConfig,
  backbone?: Backbone,
  log: Logger = (m) => console.error(m),
): Promise<ExtractionSummary> {
  const owned = backbone === undefined
  const net = backbone ?? (await loadBackbone(cfg.model))
  try {
    const skipped: string[] = []
    const archives: ClassArchive[] = []
    for (const className of listClassDirs(cfg.imagesRoot)) {
      archives.push(await extractClass(net, cfg, className, skipped, log))
    }
    const meta = [
      `model: ${cfg.model}`,
      `features: pooled average-pooling output, length ${net.featureLength}`,
      ...skipped,
    ]
    writeArchive(cfg.outputRoot, net.featureLength, archives, meta)
    return {
      classes: archives.map((a) => ({ name: a.name, samples: a.sampleIds.length })),
      dimension: net.featureLength,
      skipped,
    }
  } finally {
    if (owned) net.dispose()
  }
}
