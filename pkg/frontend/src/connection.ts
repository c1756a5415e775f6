/**
 * WebSocket connection management: schema-hash handshake, batch intake with
 * immediate acks, reconnect with a fresh mirror, and outbound interaction
 * frames. The socket is injectable so protocol logic is testable without a
 * browser.
 */

import { SCHEMA_HASH } from "./generated/messages";
import { Mirror } from "./mirror";
import { RawMessage, decodeFrame, encodeFrame } from "./wire";

/** The subset of the WebSocket API the connection needs. */
export interface SocketLike {
  binaryType: string;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: ArrayBuffer | Uint8Array }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: Uint8Array): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionStatus = "connecting" | "connected" | "rejected" | "disconnected";

export interface ConnectionEvents {
  onStatus?: (status: ConnectionStatus, detail?: string) => void;
  onBatch?: (mirror: Mirror) => void;
  onAccept?: (clientId: number) => void;
}

export class Connection {
  mirror = new Mirror();
  clientId: number | null = null;
  status: ConnectionStatus = "connecting";
  batchesApplied = 0;

  private socket: SocketLike | null = null;
  private handshaken = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    private url: string,
    private events: ConnectionEvents = {},
    private socketFactory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
    private reconnectDelayMs = 1000,
  ) {}

  connect(): void {
    this.closed = false;
    this.openSocket();
  }

  private openSocket(): void {
    this.handshaken = false;
    this.mirror = new Mirror(); // reconnect = fresh handshake + snapshot
    this.clientId = null;
    this.setStatus("connecting");
    const socket = this.socketFactory(this.url);
    this.socket = socket;
    socket.binaryType = "arraybuffer";
    socket.onopen = () => {
      socket.send(encodeFrame(0, [{ type: "client_hello", schema_hash: SCHEMA_HASH }]));
    };
    socket.onmessage = (ev) => {
      const data = ev.data instanceof Uint8Array ? ev.data : new Uint8Array(ev.data);
      this.handleFrame(data);
    };
    socket.onclose = () => this.handleClose();
    socket.onerror = () => {};
  }

  private handleFrame(data: Uint8Array): void {
    const { seq, messages } = decodeFrame(data);
    if (!this.handshaken) {
      const reply = messages[0];
      if (reply === undefined) return;
      if (reply.type === "handshake_reject") {
        this.setStatus(
          "rejected",
          `schema mismatch: server ${reply.server_schema_hash} / client ${reply.client_schema_hash}`,
        );
        this.closed = true; // rejected builds never reconnect
        return;
      }
      if (reply.type === "handshake_accept") {
        this.handshaken = true;
        this.clientId = reply.client_id as number;
        this.setStatus("connected");
        this.events.onAccept?.(this.clientId);
        return;
      }
      return;
    }
    this.mirror.applyBatch(seq, messages);
    this.batchesApplied += 1;
    // ack immediately on application: flow control measures the network
    this.send({ type: "ack", seq });
    this.events.onBatch?.(this.mirror);
  }

  private handleClose(): void {
    if (this.status !== "rejected") this.setStatus("disconnected");
    this.socket = null;
    if (this.closed) return;
    this.reconnectTimer = setTimeout(() => this.openSocket(), this.reconnectDelayMs);
  }

  private setStatus(status: ConnectionStatus, detail?: string): void {
    this.status = status;
    this.events.onStatus?.(status, detail);
  }

  send(message: RawMessage): void {
    this.socket?.send(encodeFrame(0, [message]));
  }

  // -- outbound interaction helpers

  sendGuiUpdate(uid: number, kind: string, value: unknown): void {
    const typeByKind: { [kind: string]: string } = {
      checkbox: "gui_client_bool",
      slider: "gui_client_float",
      number: "gui_client_float",
      text: "gui_client_string",
      dropdown: "gui_client_string",
      rgb: "gui_client_color",
      vector3: "gui_client_vector3",
    };
    const type = typeByKind[kind];
    if (type === undefined) return;
    this.send({ type, uid, value } as unknown as RawMessage);
  }

  sendClick(uid: number): void {
    this.send({ type: "gui_client_click", uid });
  }

  sendSceneClick(
    path: string,
    rayOrigin: [number, number, number],
    rayDirection: [number, number, number],
    screenPos: [number, number],
  ): void {
    this.send({
      type: "scene_click",
      path,
      ray_origin: rayOrigin,
      ray_direction: rayDirection,
      screen_pos: screenPos,
    } as unknown as RawMessage);
  }

  sendCameraReport(
    wxyz: [number, number, number, number],
    position: [number, number, number],
    fov: number,
    aspect: number,
    lookAt: [number, number, number],
  ): void {
    this.send({
      type: "camera_report",
      wxyz,
      position,
      fov,
      aspect,
      look_at: lookAt,
    } as unknown as RawMessage);
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.socket?.close();
  }
}
