// Session socket wrapper. One socket per session; the WebSocket
// constructor is injectable so the node-based tests can use `ws`.

import {
  buildHello,
  buildInput,
  buildPointing,
  parseServerMessage,
  type HelloOptions,
  type ServerMsg,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: string, handler: (ev: any) => void): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientHandlers {
  onMessage?: (msg: ServerMsg) => void;
  onOpen?: () => void;
  onClose?: (code: number) => void;
  onViolation?: (err: Error) => void;
}

export class NavClient {
  private ws: SocketLike;

  constructor(
    url: string,
    private hello: HelloOptions,
    private handlers: ClientHandlers = {},
    factory?: SocketFactory,
  ) {
    const make = factory ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
    this.ws = make(url);
    this.ws.addEventListener("open", () => {
      this.ws.send(buildHello(this.hello));
      this.handlers.onOpen?.();
    });
    this.ws.addEventListener("message", (ev: { data: unknown }) => {
      let msg: ServerMsg;
      try {
        msg = parseServerMessage(String(ev.data));
      } catch (err) {
        this.handlers.onViolation?.(err as Error);
        return;
      }
      this.handlers.onMessage?.(msg);
    });
    this.ws.addEventListener("close", (ev: { code?: number }) => {
      this.handlers.onClose?.(ev.code ?? 1000);
    });
  }

  sendInput(turnRateDps: number, speedMps: number): void {
    this.ws.send(buildInput(turnRateDps, speedMps));
  }

  sendPointing(headings: number[]): void {
    this.ws.send(buildPointing(headings));
  }

  close(): void {
    this.ws.close();
  }
}
