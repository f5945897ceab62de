"""Dataset builders: a 2-class disjoint-vocabulary toy set and a synthetic
15-class traffic set shaped like the public IoT/IIoT attack corpora
(same class names, flow-feature-style columns, separable with noise)."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

CLASSES = [
    "Normal", "MITM", "Fingerprinting", "Ransomware", "Uploading",
    "SQL_Injection", "DDoS_HTTP", "DDoS_TCP", "Password", "Port_Scanning",
    "Vul_Scanner", "Backdoor", "XSS", "DDoS_UDP", "DDoS_ICMP",
]

# class -> (proto choices, tcp.flags choices, dstport choices, marker tokens)
_PROFILE = {
    "Normal":         (["mqtt", "http", "dns"], ["0x10", "0x18"], [1883, 443, 53], ["publish", "telemetry"]),
    "MITM":           (["arp", "dns"], ["0x10"], [53], ["spoofed-reply", "gateway-claim"]),
    "Fingerprinting": (["tcp"], ["0x01", "0x29"], [0, 1], ["probe-odd", "ttl-walk"]),
    "Ransomware":     (["tcp"], ["0x18"], [445], ["bulk-write", "key-exchange"]),
    "Uploading":      (["http"], ["0x18"], [80, 8080], ["multipart", "put-large"]),
    "SQL_Injection":  (["http"], ["0x18"], [80, 443], ["union-select", "or-1-eq-1"]),
    "DDoS_HTTP":      (["http"], ["0x18"], [80], ["get-flood", "slow-headers"]),
    "DDoS_TCP":       (["tcp"], ["0x02"], [80, 443], ["syn-flood", "handshake-drop"]),
    "Password":       (["http", "ssh"], ["0x18"], [22, 80], ["login-retry", "dict-walk"]),
    "Port_Scanning":  (["tcp"], ["0x02"], [21, 22, 23, 25, 110, 139], ["sweep", "connect-probe"]),
    "Vul_Scanner":    (["http"], ["0x18"], [80, 8443], ["cgi-probe", "banner-grab"]),
    "Backdoor":       (["tcp"], ["0x18"], [4444, 1337], ["beacon", "reverse-shell"]),
    "XSS":            (["http"], ["0x18"], [80, 443], ["script-inject", "onerror-payload"]),
    "DDoS_UDP":       (["udp"], ["none"], [53, 123, 1900], ["datagram-flood", "amplify"]),
    "DDoS_ICMP":      (["icmp"], ["none"], [0], ["echo-flood", "ping-burst"]),
}

_RATES = ["low", "mid", "high", "burst"]
_LENS = [64, 128, 256, 512, 1024, 1460]


def traffic_row(cls: str, rng: random.Random) -> str:
    proto, flags, ports, markers = _PROFILE[cls]
    noisy = rng.random() < 0.1
    fields = [
        ("proto", rng.choice(proto)),
        ("tcp.flags", rng.choice(flags) if not noisy else rng.choice(["0x10", "0x18", "0x02"])),
        ("tcp.dstport", rng.choice(ports)),
        ("frame.len", rng.choice(_LENS)),
        ("pkt.rate", rng.choice(_RATES)),
        ("sig.note", rng.choice(markers)),
        ("seq.jitter", rng.randint(0, 9)),
    ]
    return " ".join(f"{name}: {value}" for name, value in fields)


def write_rows(path: Path, rows: list[tuple[str, str]]) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for text, label in rows:
            fh.write(json.dumps({"text": text, "label": label}) + "\n")
    return path


def make_traffic_split(tmp_path: Path, per_class: int, seed: int = 7,
                       test_fraction: float = 0.2) -> tuple[Path, Path]:
    rng = random.Random(seed)
    train, test = [], []
    for cls in CLASSES:
        n_test = max(1, int(per_class * test_fraction))
        for i in range(per_class):
            row = (traffic_row(cls, rng), cls)
            (test if i < n_test else train).append(row)
    rng.shuffle(train)
    rng.shuffle(test)
    return (write_rows(tmp_path / "train.jsonl", train),
            write_rows(tmp_path / "test.jsonl", test))


def make_toy_split(tmp_path: Path, seed: int = 3) -> tuple[Path, Path]:
    """20 training rows, two classes with fully disjoint vocabularies."""
    rng = random.Random(seed)
    vocab = {"safe": ["heartbeat", "publish", "ack", "idle", "sensor"],
             "attack": ["flood", "inject", "exfil", "spoof", "scan"]}
    train, test = [], []
    for label, words in vocab.items():
        for i in range(14):
            text = " ".join(rng.choice(words) for _ in range(6))
            (train if i < 10 else test).append((text, label))
    rng.shuffle(train)
    return (write_rows(tmp_path / "toy_train.jsonl", train),
            write_rows(tmp_path / "toy_test.jsonl", test))


@pytest.fixture()
def toy_split(tmp_path):
    return make_toy_split(tmp_path)


@pytest.fixture()
def traffic_split(tmp_path):
    return make_traffic_split(tmp_path, per_class=60)
