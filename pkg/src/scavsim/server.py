"""Asyncio TCP server exposing game instances over the wire protocol.

One connection may multiplex sessions; sessions share no mutable state.
A malformed frame gets an Error(400) reply and the connection is closed,
so a broken or hostile peer can never wedge the accept loop.
"""

from __future__ import annotations

import asyncio
import json
import logging

from .maps import MapStore
from .protocol import (
    ERR_MALFORMED,
    FrameParser,
    MSG_ERROR,
    ProtocolError,
    ServerEngine,
    encode_frame,
)

logger = logging.getLogger(__name__)


class GameServer:
    def __init__(self, map_store: MapStore, max_sessions: int = 64):
        self.engine = ServerEngine(map_store.get, max_sessions)
        self._server: asyncio.AbstractServer | None = None

    async def _handle_connection(self, reader: asyncio.StreamReader,
                                 writer: asyncio.StreamWriter) -> None:
        parser = FrameParser()
        peer = writer.get_extra_info("peername")
        try:
            while True:
                data = await reader.read(65536)
                if not data:
                    break
                try:
                    frames = parser.feed(data)
                except ProtocolError as err:
                    payload = json.dumps({"code": err.code,
                                          "message": err.message}).encode()
                    writer.write(encode_frame(MSG_ERROR, 0, 0, payload))
                    await writer.drain()
                    break  # malformed stream: close per protocol contract
                for frame in frames:
                    for reply in self.engine.handle_frame(frame):
                        writer.write(reply)
                await writer.drain()
        except (ConnectionResetError, asyncio.IncompleteReadError,
                BrokenPipeError):
            pass
        except Exception:
            logger.exception("connection handler failed for %s", peer)
            try:
                payload = json.dumps({"code": ERR_MALFORMED,
                                      "message": "internal error"}).encode()
                writer.write(encode_frame(MSG_ERROR, 0, 0, payload))
                await writer.drain()
            except Exception:
                pass
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except Exception:
                pass

    async def start(self, host: str, port: int) -> None:
        self._server = await asyncio.start_server(
            self._handle_connection, host, port)

    @property
    def port(self) -> int:
        return self._server.sockets[0].getsockname()[1]

    async def serve_forever(self) -> None:
        async with self._server:
            await self._server.serve_forever()

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()


def serve(listen: str, max_sessions: int, map_dir: str | None) -> None:
    """Blocking entry point for the CLI: run until interrupted."""
    host, _, port_s = listen.rpartition(":")
    host = host or "127.0.0.1"
    store = MapStore(map_dir)
    server = GameServer(store, max_sessions)

    async def _run():
        await server.start(host, int(port_s))
        logger.info("listening on %s:%s", host, server.port)
        print(f"listening on {host}:{server.port}", flush=True)
        await server.serve_forever()

    try:
        asyncio.run(_run())
    except KeyboardInterrupt:
        pass
