/**
 * Frida entry point: installs the hook table on the JVM of the target
 * process and streams events to the file named by the agent argument
 * `out=<path>`.
 *
 * Under Frida, `Java.use(className)` yields a wrapper whose method
 * implementations can be replaced; we wrap each hooked method so the
 * original is always invoked and its behavior never altered.
 */

import { appendFileSync, writeFileSync } from "node:fs";

import { installHooks, JavaCall, JavaHookEnv } from "./hooks.js";
import { EventSink, LineWriter } from "./wire.js";

declare const Java:
  | {
      available: boolean;
      perform(fn: () => void): void;
      use(className: string): any;
    }
  | undefined;

export class FileWriter implements LineWriter {
  constructor(private readonly path: string) {
    writeFileSync(path, "");
  }

  writeLine(line: string): void {
    appendFileSync(this.path, line + "\n");
  }
}

class FridaJavaEnv implements JavaHookEnv {
  hook(className: string, method: string, handler: (call: JavaCall) => void): void {
    const bridge = Java!;
    let clazz: any;
    try {
      clazz = bridge.use(className);
    } catch {
      return; // class absent on this runtime
    }
    const target = clazz[method];
    if (!target) return;
    for (const overload of target.overloads) {
      overload.implementation = function (this: any, ...args: unknown[]) {
        const result = overload.apply(this, args);
        try {
          handler({ self: this, args, result });
        } catch {
          // never perturb the app
        }
        return result;
      };
    }
  }
}

export function attach(outPath: string, appId: string, executionId: string): void {
  if (typeof Java === "undefined" || !Java.available) {
    throw new Error("no JVM found in target process");
  }
  const sink = new EventSink(new FileWriter(outPath), appId, executionId, "jvm");
  Java.perform(() => {
    installHooks(new FridaJavaEnv(), sink);
  });
}

function parseAgentArg(): string {
  const raw = (globalThis as any).__agent_parameters ?? "";
  const match = /(?:^|,)out=([^,]+)/.exec(String(raw));
  return match ? match[1] : "crylog.out";
}

if (typeof Java !== "undefined" && Java.available) {
  attach(parseAgentArg(), "frida.target", `run-${Date.now()}`);
}
