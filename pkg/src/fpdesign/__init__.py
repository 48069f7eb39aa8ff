"""Automated PBN straight-departure (SID) design engine.

A multi-agent decision loop over pluggable backends (remote LLM,
deterministic scripted policy, transcript replay), grounded by a JSON
navigation dataset, checked against obstacle protection zones, and scored
with route-quality metrics. A FastAPI service and CLI expose the loop to a
human supervisor who can steer it with fix commands.
"""

__version__ = "0.1.0"
