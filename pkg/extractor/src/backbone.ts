/**
 * Backbone loading and the pooled-feature forward pass.
 *
 * A backbone is any saved tfjs model (layers or graph format) whose
 * output is the pooled feature vector — for the default 152-layer
 * residual network, the 2048-wide output of the global average-pooling
 * stage. Models are read from a local directory holding `model.json`
 * plus its weight shards; inference runs in evaluation mode (predict
 * never updates normalization statistics).
 */

import * as tf from '@tensorflow/tfjs'
import { existsSync, mkdirSync, readFileSync, writeFileSync } from 'fs'
import { join } from 'path'

export class ModelUnavailable extends Error {}
export class ModelOutputShape extends Error {}

export const DEFAULT_MODEL = 'resnet152'
export const DEFAULT_FEATURE_LENGTH = 2048

export interface Backbone {
  inputSize: number
  featureLength: number
  /** [n, size, size, 3] normalized batch -> [n, featureLength] features */
  forward(batch: tf.Tensor4D): tf.Tensor2D
  dispose(): void
}

interface ModelJson {
  format?: string
  modelTopology: unknown
  weightsManifest: Array<{ paths: string[]; weights: tf.io.WeightsManifestEntry[] }>
}

function dirLoadHandler(dir: string): tf.io.IOHandler {
  return {
    async load(): Promise<tf.io.ModelArtifacts> {
      const doc = JSON.parse(readFileSync(join(dir, 'model.json'), 'utf-8')) as ModelJson
      const specs: tf.io.WeightsManifestEntry[] = []
      const buffers: Buffer[] = []
      for (const group of doc.weightsManifest) {
        specs.push(...group.weights)
        for (const path of group.paths) {
          buffers.push(readFileSync(join(dir, path)))
        }
      }
      const data = Buffer.concat(buffers)
      return {
        modelTopology: doc.modelTopology as {},
        weightSpecs: specs,
        weightData: data.buffer.slice(data.byteOffset, data.byteOffset + data.byteLength),
      }
    },
  }
}

function dirSaveHandler(dir: string): tf.io.IOHandler {
  return {
    async save(artifacts: tf.io.ModelArtifacts): Promise<tf.io.SaveResult> {
      mkdirSync(dir, { recursive: true })
      const weightData = artifacts.weightData
      const parts = Array.isArray(weightData) ? weightData : [weightData!]
      const payload = Buffer.concat(parts.map((p) => Buffer.from(p)))
      writeFileSync(join(dir, 'weights.bin'), payload)
      const doc = {
        format: 'layers-model',
        modelTopology: artifacts.modelTopology,
        weightsManifest: [{ paths: ['weights.bin'], weights: artifacts.weightSpecs }],
      }
      writeFileSync(join(dir, 'model.json'), JSON.stringify(doc) + '\n')
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON',
        },
      }
    },
  }
}

export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  await model.save(dirSaveHandler(dir))
}

function wrap(model: tf.LayersModel | tf.GraphModel): Backbone {
  const inputShape = model.inputs[0].shape ?? []
  const height = typeof inputShape[1] === 'number' && inputShape[1] > 0 ? inputShape[1] : 224

  const forward = (batch: tf.Tensor4D): tf.Tensor2D =>
    tf.tidy(() => {
      const raw = model.predict(batch, { batchSize: batch.shape[0] })
      let out = Array.isArray(raw) ? raw[0] : (raw as tf.Tensor)
      if (out.rank === 4 && out.shape[1] === 1 && out.shape[2] === 1) {
        out = out.reshape([out.shape[0], out.shape[3] as number])
      }
      if (out.rank !== 2) {
        throw new ModelOutputShape(
          `expected a pooled [n, features] output, got shape [${out.shape.join(', ')}]`,
        )
      }
      return out as tf.Tensor2D
    })

  // derive the feature length from a dry forward pass
  const probe = tf.zeros([1, height, height, 3]) as tf.Tensor4D
  const probed = forward(probe)
  const featureLength = probed.shape[1]
  probe.dispose()
  probed.dispose()

  return {
    inputSize: height,
    featureLength,
    forward,
    dispose: () => model.dispose(),
  }
}

/**
 * Load a backbone by identifier or local model directory.
 *
 * Plain identifiers (the default `resnet152`) need a converted model
 * directory on disk; pass its path via --model. This keeps the tool
 * usable offline: no weight download is attempted.
 */
export async function loadBackbone(model: string): Promise<Backbone> {
  if (!existsSync(join(model, 'model.json'))) {
    throw new ModelUnavailable(
      `no model directory at '${model}'. Convert the pretrained backbone to the ` +
        `tfjs format (model.json + weight shards) with the pooled feature vector as ` +
        `its output, then pass the directory via --model.`,
    )
  }
  const doc = JSON.parse(readFileSync(join(model, 'model.json'), 'utf-8')) as ModelJson
  const handler = dirLoadHandler(model)
  if (doc.format === 'graph-model') {
    return wrap(await tf.loadGraphModel(handler))
  }
  return wrap(await tf.loadLayersModel(handler))
}

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

/**
 * Small deterministic stand-in backbone for tests and demos: one strided
 * convolution into `featureLength` channels followed by global average
 * pooling. Positive biases keep every post-activation feature vector at
 * a positive norm, mirroring the real backbone's non-negative pooled
 * activations.
 */
export function buildDemoBackbone(featureLength = DEFAULT_FEATURE_LENGTH, inputSize = 32): {
  backbone: Backbone
  model: tf.LayersModel
} {
  const model = tf.sequential({
    layers: [
      tf.layers.conv2d({
        inputShape: [inputSize, inputSize, 3],
        filters: featureLength,
        kernelSize: 3,
        strides: 2,
        activation: 'relu',
        useBias: true,
      }),
      tf.layers.globalAveragePooling2d({}),
    ],
  })
  const rand = mulberry32(0x5eed)
  const kernel = new Float32Array(3 * 3 * 3 * featureLength)
  for (let i = 0; i < kernel.length; i++) kernel[i] = (rand() - 0.5) * 0.2
  const bias = new Float32Array(featureLength)
  for (let i = 0; i < bias.length; i++) bias[i] = 0.05 + 0.01 * rand()
  model.setWeights([
    tf.tensor4d(kernel, [3, 3, 3, featureLength]),
    tf.tensor1d(bias),
  ])
  return { backbone: wrap(model), model }
}
