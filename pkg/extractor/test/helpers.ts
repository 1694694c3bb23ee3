import { spawnSync } from 'child_process'
import { mkdtempSync, writeFileSync } from 'fs'
import { tmpdir } from 'os'
import { join } from 'path'
import { PNG } from 'pngjs'

export function tempDir(prefix: string): string {
  return mkdtempSync(join(tmpdir(), prefix))
}

export function writePng(
  path: string,
  width: number,
  height: number,
  fill: (i: number) => [number, number, number],
): void {
  const png = new PNG({ width, height })
  for (let i = 0; i < width * height; i++) {
    const [r, g, b] = fill(i)
    png.data[i * 4] = r
    png.data[i * 4 + 1] = g
    png.data[i * 4 + 2] = b
    png.data[i * 4 + 3] = 255
  }
  writeFileSync(path, PNG.sync.write(png))
}

export function writeGrayPng(path: string, width: number, height: number): void {
  const png = new PNG({ width, height, colorType: 0 })
  for (let i = 0; i < width * height; i++) {
    const g = (i * 7) % 256
    png.data[i * 4] = g
    png.data[i * 4 + 1] = g
    png.data[i * 4 + 2] = g
    png.data[i * 4 + 3] = 255
  }
  writeFileSync(path, PNG.sync.write(png))
}

/** Run the indexing CLI (the archive consumer) and return {code, stdout, stderr}. */
export function runDsi(args: string[]): { code: number; stdout: string; stderr: string } {
  for (const cmd of [['dsi'], ['python3', '-m', 'dsi.cli']]) {
    const proc = spawnSync(cmd[0], [...cmd.slice(1), ...args], { encoding: 'utf-8' })
    if (proc.error !== undefined) continue
    return { code: proc.status ?? -1, stdout: proc.stdout, stderr: proc.stderr }
  }
  throw new Error('the dsi CLI is not installed; install the main package first')
}
