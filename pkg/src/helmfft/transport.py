"""Message transports for the partitioned solver's block redistribution.

Two implementations of the same contract:

- InProcessTransport: per-(sender, receiver) FIFO channels inside one process;
  the mandatory transport used by the partitioned execution mode.
- SocketTransport: the same contract over byte-stream sockets with
  length-prefixed binary frames, so parts may live in separate processes or
  hosts.

Delivery is reliable and ordered per (sender, receiver) pair. Sends are
buffered (they do not wait for the receiver), receives block until the
matching block arrives; the exchange itself is complete only when every
expected block has been received, and the solver places a barrier between
stages on top of that.

Frame layout (all integers little-endian unsigned 32-bit):

    [payload_len][from_part][to_part][stage_tag][ext_x][ext_y][ext_z]
    followed by ext_z * ext_y * ext_x complex values, each a little-endian
    float64 (real, imag) pair, x index fastest.

payload_len counts every byte after the length word itself.
"""

import queue
import socket
import struct
import threading

import numpy as np

from .errors import ExchangeError

STAGE_FORWARD = 1
STAGE_INVERSE = 2

_HEADER = struct.Struct("<6I")  # from, to, stage, ext_x, ext_y, ext_z
_LEN = struct.Struct("<I")


class InProcessTransport:
    """Endpoint of a shared-memory mesh; obtain via InProcessMesh.endpoint()."""

    def __init__(self, mesh, part):
        self._mesh = mesh
        self.part = part

    def send(self, to_part, stage, block):
        if to_part == self.part:
            raise ExchangeError("self-send not routed through transport",
                                sender=self.part, receiver=to_part)
        self._mesh.channel(self.part, to_part).put((stage, block))

    def receive(self, from_part, stage, extents):
        try:
            got_stage, block = self._mesh.channel(from_part, self.part).get(
                timeout=self._mesh.timeout)
        except queue.Empty:
            raise ExchangeError(
                f"timed out waiting for block {from_part} -> {self.part}",
                sender=from_part, receiver=self.part) from None
        if got_stage != stage:
            raise ExchangeError(
                f"stage mismatch on edge ({from_part}, {self.part}): "
                f"expected {stage}, got {got_stage}",
                sender=from_part, receiver=self.part)
        n_z, n_y, n_x = block.shape
        if (n_x, n_y, n_z) != tuple(extents):
            raise ExchangeError(
                f"block extents {(n_x, n_y, n_z)} != expected {tuple(extents)} "
                f"on edge ({from_part}, {self.part})",
                sender=from_part, receiver=self.part)
        return block

    def close(self):
        pass


class InProcessMesh:
    """All-pairs FIFO channels for np parts in one process."""

    def __init__(self, n_parts, timeout=60.0):
        self.n_parts = n_parts
        self.timeout = timeout
        self._channels = {
            (s, r): queue.Queue()
            for s in range(n_parts) for r in range(n_parts) if s != r
        }

    def channel(self, sender, receiver):
        return self._channels[(sender, receiver)]

    def endpoint(self, part) -> InProcessTransport:
        return InProcessTransport(self, part)


def encode_frame(from_part, to_part, stage, block: np.ndarray) -> bytes:
    """Serialize one block into a length-prefixed frame."""
    block = np.ascontiguousarray(block, dtype=np.complex128)
    n_z, n_y, n_x = block.shape
    payload = _HEADER.pack(from_part, to_part, stage, n_x, n_y, n_z)
    data = block.astype("<c16", copy=False).tobytes()
    return _LEN.pack(len(payload) + len(data)) + payload + data


def decode_frame(payload: bytes):
    """Inverse of encode_frame, given the bytes after the length word."""
    from_part, to_part, stage, n_x, n_y, n_z = _HEADER.unpack_from(payload)
    data = payload[_HEADER.size:]
    expected = n_x * n_y * n_z * 16
    if len(data) != expected:
        raise ExchangeError(f"frame payload {len(data)} bytes, expected {expected}")
    block = np.frombuffer(data, dtype="<c16").astype(np.complex128).reshape(n_z, n_y, n_x)
    return from_part, to_part, stage, block


def _read_exact(sock, count):
    buf = bytearray()
    while len(buf) < count:
        chunk = sock.recv(count - len(buf))
        if not chunk:
            raise ExchangeError("peer closed connection mid-frame")
        buf.extend(chunk)
    return bytes(buf)


class SocketTransport:
    """Transport over connected sockets, one per peer part.

    A background reader drains each peer socket into per-(sender, stage)
    queues, so symmetric all-to-all exchanges cannot deadlock on full
    kernel buffers.
    """

    def __init__(self, part, peers):
        self.part = part
        self._socks = dict(peers)  # part id -> connected socket
        self._queues = {}
        self._lock = threading.Lock()
        self._readers = []
        for peer, sock in self._socks.items():
            t = threading.Thread(target=self._drain, args=(peer, sock), daemon=True)
            t.start()
            self._readers.append(t)

    def _queue(self, from_part, stage):
        with self._lock:
            return self._queues.setdefault((from_part, stage), queue.Queue())

    def _drain(self, peer, sock):
        try:
            while True:
                (length,) = _LEN.unpack(_read_exact(sock, _LEN.size))
                payload = _read_exact(sock, length)
                from_part, to_part, stage, block = decode_frame(payload)
                if to_part != self.part:
                    raise ExchangeError(
                        f"misrouted frame for part {to_part} arrived at {self.part}",
                        sender=from_part, receiver=self.part)
                self._queue(from_part, stage).put(block)
        except (ExchangeError, OSError):
            return  # socket closed or corrupt stream; receives will time out

    def send(self, to_part, stage, block):
        sock = self._socks.get(to_part)
        if sock is None:
            raise ExchangeError(f"no connection from {self.part} to {to_part}",
                                sender=self.part, receiver=to_part)
        sock.sendall(encode_frame(self.part, to_part, stage, block))

    def receive(self, from_part, stage, extents, timeout=60.0):
        try:
            block = self._queue(from_part, stage).get(timeout=timeout)
        except queue.Empty:
            raise ExchangeError(
                f"timed out waiting for block {from_part} -> {self.part}",
                sender=from_part, receiver=self.part) from None
        n_z, n_y, n_x = block.shape
        if (n_x, n_y, n_z) != tuple(extents):
            raise ExchangeError(
                f"block extents {(n_x, n_y, n_z)} != expected {tuple(extents)} "
                f"on edge ({from_part}, {self.part})",
                sender=from_part, receiver=self.part)
        return block

    def close(self):
        for sock in self._socks.values():
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            sock.close()


def socket_mesh(n_parts, host="127.0.0.1"):
    """Fully-connected localhost TCP mesh; returns one SocketTransport per part.

    Intended for tests and single-host experiments; a distributed deployment
    would establish the same pairwise connections across machines.
    """
    listeners = {}
    ports = {}
    for p in range(n_parts):
        srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        srv.bind((host, 0))
        srv.listen(n_parts)
        listeners[p] = srv
        ports[p] = srv.getsockname()[1]

    peers = {p: {} for p in range(n_parts)}
    lock = threading.Lock()

    def accept_for(p, expected):
        for _ in range(expected):
            conn, _addr = listeners[p].accept()
            (who,) = _LEN.unpack(_read_exact(conn, _LEN.size))
            with lock:
                peers[p][who] = conn

    threads = []
    for p in range(n_parts):
        expected = p  # parts connect to all lower-numbered parts
        if expected:
            t = threading.Thread(target=accept_for, args=(p, expected))
            t.start()
            threads.append(t)
    for p in range(n_parts):
        for q in range(p + 1, n_parts):
            sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            sock.connect((host, ports[q]))
            sock.sendall(_LEN.pack(p))
            with lock:
                peers[p][q] = sock
    for t in threads:
        t.join()
    for srv in listeners.values():
        srv.close()
    return [SocketTransport(p, peers[p]) for p in range(n_parts)]
