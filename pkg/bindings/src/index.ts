/**
 * Node bindings for the dataforge tokenizer and mixture sampler.
 *
 * Nothing is reimplemented here: every call forwards to the dataforge
 * CLI, so results are bit-identical to running it by hand. Set
 * DATAFORGE_CLI to override how the CLI is launched (default: the
 * `dataforge` executable on PATH).
 */

import { LineClient, resolveCli, runOnce } from './proc.js';

export interface BindOptions {
  /** CLI argv override, e.g. ["python3", "-m", "dataforge.cli"]. */
  cli?: string[];
}

export interface DecodeOutput {
  text: string;
  lossy: boolean;
}

export interface BoundTokenizer {
  encode(text: string): Promise<number[]>;
  decode(ids: number[]): Promise<DecodeOutput>;
  close(): void;
}

export interface BoundSampler {
  next(): Promise<string>;
  close(): void;
}

/**
 * Open a tokenizer from its vocabulary and merge files.
 *
 * Keeps streaming CLI workers alive between calls; errors raised by the
 * CLI (bad paths, malformed files, id out of range) reject with the
 * CLI's own message.
 */
export function bindTokenizer(
  vocabPath: string,
  mergesPath: string,
  options: BindOptions = {},
): BoundTokenizer {
  const cli = resolveCli(options.cli);
  const common = ['--vocab', vocabPath, '--merges', mergesPath, '--stdin-jsonl'];
  let encoder: LineClient | null = null;
  let decoder: LineClient | null = null;

  return {
    async encode(text: string): Promise<number[]> {
      encoder = encoder ?? new LineClient(cli, ['encode', ...common]);
      const line = await encoder.request(JSON.stringify(text));
      return JSON.parse(line) as number[];
    },
    async decode(ids: number[]): Promise<DecodeOutput> {
      decoder = decoder ?? new LineClient(cli, ['decode', ...common]);
      const line = await decoder.request(JSON.stringify(ids));
      return JSON.parse(line) as DecodeOutput;
    },
    close(): void {
      encoder?.close();
      decoder?.close();
      encoder = null;
      decoder = null;
    },
  };
}

export interface SamplerOptions extends BindOptions {
  /** Draws fetched per CLI invocation. */
  chunkSize?: number;
}

/**
 * Open a deterministic mixture sampler over a spec file.
 *
 * Draws are fetched in chunks; each refill resumes the exact (seed,
 * position) stream via the CLI's --skip flag, so the sequence equals one
 * uninterrupted `mixture-sample --emit draws` run. Samplers are stateful:
 * use one per consumer.
 */
export function bindSampler(
  specPath: string,
  seed: number,
  options: SamplerOptions = {},
): BoundSampler {
  const cli = resolveCli(options.cli);
  const chunkSize = options.chunkSize ?? 8192;
  if (!Number.isInteger(seed)) throw new Error(`seed must be an integer, got ${seed}`);
  if (!Number.isInteger(chunkSize) || chunkSize < 1) {
    throw new Error(`chunkSize must be a positive integer, got ${chunkSize}`);
  }

  let buffer: string[] = [];
  let consumed = 0;
  let closed = false;
  let inflight: Promise<void> | null = null;

  const refill = async (): Promise<void> => {
    const { stdout } = await runOnce(cli, [
      'mixture-sample',
      '--spec', specPath,
      '--seed', String(seed),
      '--skip', String(consumed),
      '--draws', String(chunkSize),
      '--emit', 'draws',
    ]);
    const lines = stdout.split('\n');
    if (lines.length > 0 && lines[lines.length - 1] === '') lines.pop();
    buffer = lines;
  };

  return {
    async next(): Promise<string> {
      if (closed) throw new Error('sampler closed');
      while (buffer.length === 0) {
        // serialize refills so concurrent next() calls stay ordered
        inflight = inflight ?? refill();
        try {
          await inflight;
        } finally {
          inflight = null;
        }
      }
      consumed += 1;
      return buffer.shift()!;
    },
    close(): void {
      closed = true;
      buffer = [];
    },
  };
}
