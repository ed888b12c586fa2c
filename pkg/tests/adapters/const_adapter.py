#!/usr/bin/env python3
"""Answers every request with the same completion: "x;</s>"."""
import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    msg = json.loads(line)
    sys.stdout.write(json.dumps({"id": msg["id"], "completion": "x;</s>"}) + "\n")
    sys.stdout.flush()
