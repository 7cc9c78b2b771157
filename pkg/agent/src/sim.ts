/**
 * Simulated instrumentation backend for tests and offline development.
 *
 * Registers the hook table in an in-memory dispatcher; "programs" drive
 * it by announcing the Java calls they would make. This exercises every
 * handler and the wire emitter without a JVM.
 */

import { installHooks, JavaCall, JavaHookEnv } from "./hooks.js";
import { BufferWriter, EventSink } from "./wire.js";

export class SimulatedJavaEnv implements JavaHookEnv {
  private handlers = new Map<string, (call: JavaCall) => void>();

  hook(className: string, method: string, handler: (call: JavaCall) => void): void {
    this.handlers.set(`${className}#${method}`, handler);
  }

  call(className: string, method: string, call: JavaCall): void {
    const handler = this.handlers.get(`${className}#${method}`);
    if (!handler) {
      throw new Error(`no hook installed for ${className}#${method}`);
    }
    handler(call);
  }
}

export interface SimulatedRun {
  env: SimulatedJavaEnv;
  writer: BufferWriter;
}

export function startRun(appId: string, executionId: string): SimulatedRun {
  const writer = new BufferWriter();
  const sink = new EventSink(writer, appId, executionId, "jvm-sim");
  const env = new SimulatedJavaEnv();
  installHooks(env, sink);
  return { env, writer };
}
