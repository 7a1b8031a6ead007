"""Toy external scorer service speaking the kgc-forge NDJSON wire protocol."""

from .model import ToyModel, init_model, load_model, save_model, score_pairs, score_triples
from .protocol import ProtocolError, handle_line, handle_request, validate_request
from .server import BridgeServer, serve_stdio

__all__ = [
    "ToyModel",
    "init_model",
    "load_model",
    "save_model",
    "score_pairs",
    "score_triples",
    "ProtocolError",
    "handle_line",
    "handle_request",
    "validate_request",
    "BridgeServer",
    "serve_stdio",
]

__version__ = "0.1.0"
