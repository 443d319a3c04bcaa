import { spawn, type ChildProcessWithoutNullStreams } from 'node:child_process';
import { createInterface } from 'node:readline';

const UTF8_ENV = { ...process.env, PYTHONIOENCODING: 'utf-8' };

/** The dataforge CLI invocation, overridable via DATAFORGE_CLI. */
export function resolveCli(override?: string[]): string[] {
  if (override && override.length > 0) return override;
  const env = process.env.DATAFORGE_CLI;
  if (env && env.trim().length > 0) return env.trim().split(/\s+/);
  return ['dataforge'];
}

export interface RunResult {
  stdout: string;
  stderr: string;
}

/** Run one CLI command to completion; reject with the CLI's own message on failure. */
export function runOnce(cli: string[], args: string[], input?: string): Promise<RunResult> {
  return new Promise((resolve, reject) => {
    const child = spawn(cli[0], [...cli.slice(1), ...args], { env: UTF8_ENV });
    let stdout = '';
    let stderr = '';
    child.stdout.setEncoding('utf-8');
    child.stderr.setEncoding('utf-8');
    child.stdout.on('data', (d: string) => (stdout += d));
    child.stderr.on('data', (d: string) => (stderr += d));
    child.on('error', (err) => reject(new Error(`failed to launch ${cli[0]}: ${err.message}`)));
    child.on('close', (code) => {
      if (code === 0) {
        resolve({ stdout, stderr });
      } else {
        reject(new Error(stderr.trim() || `${cli[0]} exited with code ${code}`));
      }
    });
    if (input !== undefined) child.stdin.write(input);
    child.stdin.end();
  });
}

interface Waiter {
  resolve: (line: string) => void;
  reject: (err: Error) => void;
}

/**
 * Persistent line-protocol client: each request line produces exactly one
 * response line. Used for the streaming encode/decode CLI modes.
 */
export class LineClient {
  private child: ChildProcessWithoutNullStreams;
  private waiters: Waiter[] = [];
  private stderr = '';
  private exitError: Error | null = null;
  private closed = false;

  constructor(cli: string[], args: string[]) {
    this.child = spawn(cli[0], [...cli.slice(1), ...args], { env: UTF8_ENV });
    this.child.stderr.setEncoding('utf-8');
    this.child.stderr.on('data', (d: string) => (this.stderr += d));
    this.child.on('error', (err) => this.fail(new Error(`failed to launch ${cli[0]}: ${err.message}`)));
    const lines = createInterface({ input: this.child.stdout });
    lines.on('line', (line) => {
      const waiter = this.waiters.shift();
      if (waiter) waiter.resolve(line);
    });
    this.child.on('close', (code) => {
      this.closed = true;
      if (code !== 0 && !this.exitError) {
        this.exitError = new Error(this.stderr.trim() || `${cli[0]} exited with code ${code}`);
      }
      this.fail(this.exitError ?? new Error('process closed'));
    });
  }

  private fail(err: Error): void {
    this.exitError = this.exitError ?? err;
    for (const waiter of this.waiters.splice(0)) waiter.reject(err);
  }

  request(line: string): Promise<string> {
    return new Promise((resolve, reject) => {
      if (this.closed || this.exitError) {
        reject(this.exitError ?? new Error('process closed'));
        return;
      }
      this.waiters.push({ resolve, reject });
      this.child.stdin.write(line + '\n');
    });
  }

  close(): void {
    if (!this.closed) {
      this.closed = true;
      this.child.stdin.end();
      this.child.kill();
      this.fail(new Error('client closed'));
    }
  }
}
