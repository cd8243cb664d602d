"""Audio-augmented-reality gallery engine.

Simulates camera-landmark indoor positioning, attaches virtual spatialized
sound sources to physical locations, renders a deterministic binaural
soundscape for a moving listener, logs engagement, and serves a live
authoring/preview session over WebSocket.
"""

__version__ = "0.1.0"
