import { type ChildProcessByStdio, spawn } from "node:child_process";
import { createInterface, type Interface } from "node:readline";
import type { Readable, Writable } from "node:stream";

import { EnvServerError, type Reply } from "./protocol.js";

export interface ClientOptions {
  /** Python executable, default "python3". */
  python?: string;
  /** Working directory for the server process. */
  cwd?: string;
  /** Extra environment variables merged over process.env. */
  env?: Record<string, string>;
}

interface Pending {
  resolve: (result: unknown) => void;
  reject: (err: Error) => void;
}

/**
 * One `python3 -m pulsekit.envserver` subprocess with an id-matched
 * request/reply pump.  Calls may be issued concurrently; replies are
 * routed by id.
 */
export class EnvServerClient {
  private proc: ChildProcessByStdio<Writable, Readable, null>;
  private lines: Interface;
  private pending = new Map<number, Pending>();
  private nextId = 1;
  private exited: Error | null = null;

  private constructor(proc: ChildProcessByStdio<Writable, Readable, null>) {
    this.proc = proc;
    this.lines = createInterface({ input: proc.stdout });
    this.lines.on("line", (line) => this.onLine(line));
    proc.on("exit", (code, signal) => {
      this.exited = new Error(
        `environment server exited (code ${code}, signal ${signal})`,
      );
      this.failAll(this.exited);
    });
    proc.on("error", (err) => {
      this.exited = err;
      this.failAll(err);
    });
  }

  static start(options: ClientOptions = {}): EnvServerClient {
    const proc = spawn(
      options.python ?? "python3",
      ["-m", "pulsekit.envserver"],
      {
        cwd: options.cwd,
        env: { ...process.env, ...options.env },
        stdio: ["pipe", "pipe", "inherit"],
      },
    );
    return new EnvServerClient(proc);
  }

  private onLine(line: string): void {
    let reply: Reply;
    try {
      reply = JSON.parse(line) as Reply;
    } catch {
      return; // stray non-JSON output; nothing to route it to
    }
    const entry = reply.id === null ? undefined : this.pending.get(reply.id);
    if (entry === undefined) {
      return;
    }
    this.pending.delete(reply.id as number);
    if (reply.ok) {
      entry.resolve(reply.result);
    } else {
      const err = reply.error ?? { type: "internal" as const, message: "unknown error" };
      entry.reject(new EnvServerError(err.type, err.message));
    }
  }

  private failAll(err: Error): void {
    for (const entry of this.pending.values()) {
      entry.reject(err);
    }
    this.pending.clear();
  }

  /** Send one request and await its routed reply. */
  call(op: string, fields: Record<string, unknown> = {}): Promise<unknown> {
    if (this.exited !== null) {
      return Promise.reject(this.exited);
    }
    const id = this.nextId++;
    const promise = new Promise<unknown>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
    });
    this.proc.stdin.write(JSON.stringify({ id, op, ...fields }) + "\n");
    return promise;
  }

  /** Ask the server to exit and wait for the process to go away. */
  async shutdown(): Promise<void> {
    if (this.exited !== null) {
      return;
    }
    const gone = new Promise<void>((resolve) => {
      this.proc.once("exit", () => resolve());
    });
    try {
      await this.call("shutdown");
    } catch {
      // already dying is fine
    }
    await gone;
  }

  /** Hard-kill the subprocess (last resort; prefer shutdown). */
  dispose(): void {
    if (this.exited === null) {
      this.proc.kill();
    }
  }
}
