"""Stateless JSON/HTTP service over a loaded style set.

Images travel as base64-encoded 8-bit RGB PNG. Every request is
independent; the only shared state is the read-only style set, so the
threading server needs no locks. Permissive CORS headers are emitted so
a browser frontend can talk to the service directly.
"""

from __future__ import annotations

import base64
import binascii
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .fileio import CodecError, decode_png, encode_png
from .style import StyleSet, enhance_with_style, interpolate_styles, predict


class RequestError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


def _decode_image_field(body: dict) -> np.ndarray:
    raw = body.get("image")
    if not isinstance(raw, str):
        raise RequestError(400, "missing or non-string 'image' field")
    try:
        data = base64.b64decode(raw, validate=True)
    except (binascii.Error, ValueError):
        raise RequestError(400, "'image' is not valid base64") from None
    try:
        return decode_png(data)
    except CodecError as exc:
        raise RequestError(400, f"bad PNG payload: {exc}") from None


def _encode_image_field(img: np.ndarray) -> str:
    return base64.b64encode(encode_png(img)).decode("ascii")


def _params_payload(curve, ccm) -> dict:
    return {
        "tf": [float(v) for v in curve],
        "ccm": [float(v) for v in np.asarray(ccm).ravel()],
    }


class StyleService:
    """Request logic, kept separate from HTTP plumbing for testability."""

    def __init__(self, styles: StyleSet):
        self.styles = styles

    def _profile(self, body: dict, field: str):
        name = body.get(field)
        if not isinstance(name, str):
            raise RequestError(400, f"missing or non-string {field!r} field")
        try:
            return self.styles.get(name)
        except KeyError:
            raise RequestError(404, f"unknown style {name!r}") from None

    def list_styles(self) -> dict:
        return {"styles": self.styles.names()}

    def enhance(self, body: dict) -> dict:
        img = _decode_image_field(body)
        profile = self._profile(body, "style")
        curve, ccm = predict(profile, img)
        out = enhance_with_style(img, profile)
        return {"image": _encode_image_field(out), **_params_payload(curve, ccm)}

    def interpolate(self, body: dict) -> dict:
        img = _decode_image_field(body)
        a = self._profile(body, "style_a")
        b = self._profile(body, "style_b")
        t = body.get("t")
        if not isinstance(t, (int, float)) or isinstance(t, bool):
            raise RequestError(400, "missing or non-numeric 't' field")
        try:
            mixed = interpolate_styles(a, b, float(t))
        except ValueError as exc:
            raise RequestError(400, str(exc)) from None
        curve, ccm = predict(mixed, img)
        out = enhance_with_style(img, mixed)
        return {"image": _encode_image_field(out), "t": float(t), **_params_payload(curve, ccm)}

    def chain(self, body: dict) -> dict:
        img = _decode_image_field(body)
        names = body.get("styles")
        if not isinstance(names, list) or not names:
            raise RequestError(400, "'styles' must be a nonempty list of names")
        profiles = [self._profile({"style": n}, "style") for n in names]
        stages = []
        current = img
        for profile in profiles:
            curve, ccm = predict(profile, current)
            current = enhance_with_style(current, profile)
            stages.append({"style": profile.name, **_params_payload(curve, ccm)})
        return {"image": _encode_image_field(current), "stages": stages}


class _Handler(BaseHTTPRequestHandler):
    service: StyleService

    def log_message(self, fmt, *args):  # keep test output clean
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):  # CORS preflight
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self):
        if self.path == "/healthz":
            self._send_json(200, {"ok": True})
        elif self.path == "/styles":
            self._send_json(200, self.service.list_styles())
        else:
            self._send_json(404, {"error": f"no such endpoint {self.path}"})

    def do_POST(self):
        handlers = {
            "/enhance": self.service.enhance,
            "/interpolate": self.service.interpolate,
            "/chain": self.service.chain,
        }
        handler = handlers.get(self.path)
        if handler is None:
            self._send_json(404, {"error": f"no such endpoint {self.path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length).decode("utf-8")) if length else {}
            if not isinstance(body, dict):
                raise RequestError(400, "request body must be a JSON object")
            self._send_json(200, handler(body))
        except RequestError as exc:
            self._send_json(exc.status, {"error": exc.message})
        except json.JSONDecodeError as exc:
            self._send_json(400, {"error": f"bad JSON body: {exc}"})


def create_server(styles: StyleSet, host: str = "127.0.0.1", port: int = 8765) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": StyleService(styles)})
    return ThreadingHTTPServer((host, port), handler)


def serve(styles: StyleSet, host: str = "127.0.0.1", port: int = 8765) -> None:
    """Run until interrupted."""
    with create_server(styles, host, port) as httpd:
        addr = httpd.server_address
        print(f"serving {len(styles.names())} styles on http://{addr[0]}:{addr[1]}")
        try:
            httpd.serve_forever()
        except KeyboardInterrupt:
            pass
