/**
 * Feature-archive serialization.
 *
 * Array files are NPY v1.0 restricted to little-endian float64, C order,
 * 2-D shape, with the header padded to 64-byte alignment — exactly the
 * subset the `dsi` feature-store parser accepts (and what the reference
 * ecosystem serializer emits for such arrays).
 */

import { mkdirSync, writeFileSync } from 'fs'
import { join } from 'path'

const MAGIC = Buffer.from('\x93NUMPY', 'latin1')

export function serializeMatrix(rows: number, cols: number, values: Float64Array): Buffer {
  if (rows < 1 || cols < 1 || values.length !== rows * cols) {
    throw new Error(`bad matrix: ${rows}x${cols} with ${values.length} values`)
  }
  let header = `{'descr': '<f8', 'fortran_order': False, 'shape': (${rows}, ${cols}), }`
  const pad = (64 - ((10 + header.length + 1) % 64)) % 64
  header = header + ' '.repeat(pad) + '\n'

  const head = Buffer.alloc(10 + header.length)
  MAGIC.copy(head, 0)
  head[6] = 1 // format version 1.0
  head[7] = 0
  head.writeUInt16LE(header.length, 8)
  head.write(header, 10, 'latin1')

  const payload = Buffer.alloc(values.length * 8)
  const view = new DataView(payload.buffer, payload.byteOffset, payload.byteLength)
  for (let i = 0; i < values.length; i++) {
    view.setFloat64(i * 8, values[i], true)
  }
  return Buffer.concat([head, payload])
}

export interface ManifestClass {
  name: string
  file: string
  sample_ids: string[]
}

export interface Manifest {
  dimension: number
  classes: ManifestClass[]
  meta?: string[]
}

export interface ClassArchive {
  name: string
  sampleIds: string[]
  vectors: Float64Array // rows * dimension, row-major
}

/** Filesystem-safe array file name, unique within the archive. */
export function classFileName(name: string, taken: Set<string>): string {
  let slug = name.replace(/[^A-Za-z0-9._-]/g, '_')
  if (!slug || slug.startsWith('.')) slug = 'class'
  let candidate = `${slug}.npy`
  for (let i = 1; taken.has(candidate); i++) {
    candidate = `${slug}_${i}.npy`
  }
  taken.add(candidate)
  return candidate
}

export function writeArchive(
  root: string,
  dimension: number,
  classes: ClassArchive[],
  meta: string[],
): void {
  mkdirSync(root, { recursive: true })
  const taken = new Set<string>()
  const manifest: Manifest = { dimension, classes: [] }
  for (const cls of classes) {
    const file = classFileName(cls.name, taken)
    const rows = cls.sampleIds.length
    writeFileSync(join(root, file), serializeMatrix(rows, dimension, cls.vectors))
    manifest.classes.push({ name: cls.name, file, sample_ids: cls.sampleIds })
  }
  if (meta.length > 0) manifest.meta = meta
  writeFileSync(join(root, 'manifest.json'), JSON.stringify(manifest, null, 2) + '\n')
}
