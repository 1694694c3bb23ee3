#!/usr/bin/env node
/**
 * dsi-extract --images <root> --out <root> [--model resnet152] [--batch 64]
 *
 * Walks an image directory tree (one subdirectory per class), runs every
 * image through the backbone, and writes a feature archive the `dsi`
 * CLI consumes directly.
 */

import { extract } from './extract.js'
import { DEFAULT_MODEL, ModelUnavailable } from './backbone.js'

const USAGE =
  'usage: dsi-extract --images <root> --out <root> [--model resnet152] [--batch 64]\n'

class UsageError extends Error {}

interface Args {
  images: string
  out: string
  model: string
  batch: number
}

export function parseArgs(argv: string[]): Args {
  const values = new Map<string, string>()
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i]
    if (!flag.startsWith('--')) throw new UsageError(`unexpected argument '${flag}'`)
    const value = argv[i + 1]
    if (value === undefined) throw new UsageError(`missing value for ${flag}`)
    values.set(flag.slice(2), value)
  }
  for (const key of values.keys()) {
    if (!['images', 'out', 'model', 'batch'].includes(key)) {
      throw new UsageError(`unknown option --${key}`)
    }
  }
  const images = values.get('images')
  const out = values.get('out')
  if (!images || !out) throw new UsageError('--images and --out are required')
  const batch = Number(values.get('batch') ?? '64')
  if (!Number.isInteger(batch) || batch < 1) {
    throw new UsageError(`--batch must be a positive integer, got ${values.get('batch')}`)
  }
  return { images, out, model: values.get('model') ?? DEFAULT_MODEL, batch }
}

export async function main(argv: string[]): Promise<number> {
  let args: Args
  try {
    args = parseArgs(argv)
  } catch (err) {
    process.stderr.write(USAGE)
    process.stderr.write(`dsi-extract: error: ${(err as Error).message}\n`)
    return 2
  }
  try {
    const summary = await extract({
      imagesRoot: args.images,
      outputRoot: args.out,
      model: args.model,
      batchSize: args.batch,
    })
    for (const cls of summary.classes) {
      process.stdout.write(`${cls.name}: ${cls.samples} vectors\n`)
    }
    process.stdout.write(
      `wrote ${summary.classes.length} classes (dimension ${summary.dimension}) to ${args.out}\n`,
    )
    if (summary.skipped.length > 0) {
      process.stdout.write(`${summary.skipped.length} images skipped (see manifest meta)\n`)
    }
    return 0
  } catch (err) {
    if (err instanceof ModelUnavailable) {
      process.stderr.write(`dsi-extract: ${err.message}\n`)
      return 2
    }
    process.stderr.write(`dsi-extract: error: ${(err as Error).message}\n`)
    return 1
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  (import.meta.url === `file://${process.argv[1]}` ||
    import.meta.url === new URL(`file://${process.argv[1]}.js`).href)

if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code
  })
}
