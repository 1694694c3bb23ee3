export { serializeMatrix, writeArchive, classFileName } from './npy.js'
export type { ClassArchive, Manifest, ManifestClass } from './npy.js'
export {
  CHANNEL_MEAN,
  CHANNEL_STD,
  IMAGE_EXTENSIONS,
  UnreadableImage,
  decodeImage,
  toModelInput,
} from './image.js'
export type { DecodedImage } from './image.js'
export {
  DEFAULT_FEATURE_LENGTH,
  DEFAULT_MODEL,
  ModelOutputShape,
  ModelUnavailable,
  buildDemoBackbone,
  loadBackbone,
  saveModel,
} from './backbone.js'
export type { Backbone } from './backbone.js'
export { BadFeatureVector, EmptyClassDir, NoClassDirs, extract } from './extract.js'
export type { ExtractionConfig, ExtractionSummary } from './extract.js'
