"""
Live operator service: the session's cycle loop on a fixed tick, with
operators connected over websockets (one JSON object per text frame).

Connection handlers only parse frames and queue them; the tick loop applies
queued messages at the next cycle boundary and broadcasts the resulting
state. Nothing else touches the agent.
"""
from __future__ import annotations
from typing import Dict, List, Optional, Tuple
import asyncio
import logging

import websockets

from .errors import PortInUse, ProtocolError
from .session import BoundaryResult, Message, Session, encode_message, error_message, parse_message

log = logging.getLogger(__name__)


class Connection:
    def __init__(self, websocket):
        self.websocket = websocket
        self.sent = 0
        self.received = 0

    def __repr__(self) -> str:
        return f"Connection({getattr(self.websocket, 'remote_address', None)})"


class OperatorService:
    def __init__(self, session: Session, tick_ms: int = 100):
        if tick_ms < 1:
            raise ValueError("tick_ms must be positive")
        self.session = session
        self.tick_ms = tick_ms
        self.port: Optional[int] = None
        self._inbox: List[Tuple[Connection, Message]] = []
        self._connections: Dict[Connection, None] = {}

    # -- mailbox and cycle, usable without any network ----------------------

    def submit(self, client, message: Message):
        self._inbox.append((client, message))

    def tick_once(self) -> BoundaryResult:
        inbox, self._inbox = self._inbox, []
        return self.session.boundary(inbox)

    # -- transport -----------------------------------------------------------

    async def _send(self, conn: Connection, message: Message):
        conn.sent += 1
        frame = encode_message(dict(message, seq=conn.sent))
        try:
            await conn.websocket.send(frame)
        except websockets.ConnectionClosed:
            self._connections.pop(conn, None)

    async def _deliver(self, result: BoundaryResult):
        for client, replies in result.replies:
            if isinstance(client, Connection) and client in self._connections:
                for reply in replies:
                    await self._send(client, reply)
        for message in result.broadcasts:
            for conn in list(self._connections):
                await self._send(conn, message)

    async def _handle(self, websocket):
        conn = Connection(websocket)
        self._connections[conn] = None
        log.info("operator connected: %s", conn)
        try:
            await self._send(conn, self.session.hello_message())
            await self._send(conn, self.session.state_message())
            async for frame in websocket:
                conn.received += 1
                try:
                    message = parse_message(frame)
                except ProtocolError as e:
                    await self._send(conn, dict(error_message(e.code, str(e)), of_seq=conn.received))
                    continue
                message.setdefault("seq", conn.received)
                self.submit(conn, message)
        except websockets.ConnectionClosed:
            pass
        finally:
            self._connections.pop(conn, None)
            log.info("operator disconnected: %s", conn)

    async def _loop(self, stop: Optional[asyncio.Event]):
        loop = asyncio.get_running_loop()
        period = self.tick_ms / 1000.0
        while stop is None or not stop.is_set():
            started = loop.time()
            result = self.tick_once()
            await self._deliver(result)
            await asyncio.sleep(max(0.0, period - (loop.time() - started)))

    async def serve_forever(self, host: str = "127.0.0.1", port: int = 8765,
                            ready: Optional[asyncio.Event] = None,
                            stop: Optional[asyncio.Event] = None):
        try:
            server = await websockets.serve(self._handle, host, port)
        except OSError as e:
            raise PortInUse(f"cannot listen on {host}:{port}: {e}") from e
        self.port = server.sockets[0].getsockname()[1]
        log.info("serving on ws://%s:%d, tick %d ms", host, self.port, self.tick_ms)
        if ready is not None:
            ready.set()
        try:
            await self._loop(stop)
        finally:
            server.close()
            await server.wait_closed()


def serve(session: Session, port: int, host: str = "127.0.0.1", tick_ms: int = 100):
    """Run the live service until interrupted."""
    service = OperatorService(session, tick_ms)
    try:
        asyncio.run(service.serve_forever(host, port))
    except KeyboardInterrupt:
        log.info("service stopped")
