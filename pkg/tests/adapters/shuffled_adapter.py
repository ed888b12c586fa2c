#!/usr/bin/env python3
"""Reads all requests, then answers them in reverse order (ids still match)."""
import json
import sys

requests = [json.loads(line) for line in sys.stdin if line.strip()]
for msg in reversed(requests):
    sys.stdout.write(json.dumps({"id": msg["id"], "completion": f"echo:{msg['prompt']}"}) + "\n")
    sys.stdout.flush()
