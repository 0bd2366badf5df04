#!/usr/bin/env python3
"""External fine-tuning backend for the bert/albert/xlnet checkpoints.

Point CITEIMPACT_TRANSFORMERS_CMD at "python3 /path/to/hf_backend.py".
Requires torch and transformers.
"""
import argparse
import json
import os
import random

import numpy as np
import torch
from sklearn.metrics import f1_score
from transformers import AutoModelForSequenceClassification, AutoTokenizer


def read_jsonl(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def batches(rows, size, shuffle, rng):
    order = list(range(len(rows)))
    if shuffle:
        rng.shuffle(order)
    for i in range(0, len(order), size):
        yield [rows[j] for j in order[i:i + size]]


def encode(tokenizer, rows, max_len, device):
    enc = tokenizer([r["text"] for r in rows], truncation=True, max_length=max_len,
                    padding=True, return_tensors="pt")
    return {k: v.to(device) for k, v in enc.items()}


def predict_proba(model, tokenizer, rows, max_len, batch_size, device):
    model.eval()
    out = []
    with torch.no_grad():
        for batch in batches(rows, batch_size, False, None):
            logits = model(**encode(tokenizer, batch, max_len, device)).logits
            out.append(torch.softmax(logits.double(), dim=-1).cpu().numpy())
    return np.concatenate(out) if out else np.zeros((0, model.config.num_labels))


def fine_tune(a):
    random.seed(a.seed)
    np.random.seed(a.seed)
    torch.manual_seed(a.seed)
    device = "cuda" if torch.cuda.is_available() else "cpu"
    tokenizer = AutoTokenizer.from_pretrained(a.checkpoint)
    model = AutoModelForSequenceClassification.from_pretrained(
        a.checkpoint, num_labels=a.num_labels).to(device)
    train = read_jsonl(a.train)
    val = read_jsonl(a.val) if a.val else []
    weights = None
    if a.class_weights:
        weights = torch.tensor([float(w) for w in a.class_weights.split(",")], device=device)
    opt = torch.optim.AdamW(model.parameters(), lr=a.lr)
    rng = random.Random(a.seed)
    report = {"train_loss": [], "train_accuracy": [], "selection_macro_f1": [], "best_epoch": None}
    best = -1.0
    for epoch in range(a.epochs):
        model.train()
        total, correct, loss_sum = 0, 0, 0.0
        for batch in batches(train, a.batch_size, True, rng):
            labels = torch.tensor([r["label"] for r in batch], device=device)
            logits = model(**encode(tokenizer, batch, a.max_seq_len, device)).logits
            logp = torch.log_softmax(logits, dim=-1).gather(1, labels[:, None]).squeeze(1)
            loss = -((1 - logp.exp()) ** a.gamma) * logp
            if weights is not None:
                loss = loss * weights[labels]
            loss = loss.mean()
            opt.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), 5.0)
            opt.step()
            loss_sum += loss.item() * len(batch)
            total += len(batch)
            correct += (logits.argmax(-1) == labels).sum().item()
        report["train_loss"].append(loss_sum / total)
        report["train_accuracy"].append(correct / total)
        scored = val or train
        pred = predict_proba(model, tokenizer, scored, a.max_seq_len, a.batch_size, device).argmax(1)
        f1 = f1_score([r["label"] for r in scored], pred, average="macro",
                      labels=list(range(a.num_labels)), zero_division=0)
        report["selection_macro_f1"].append(f1)
        if f1 > best:
            best = f1
            report["best_epoch"] = epoch
            model.save_pretrained(a.out)
            tokenizer.save_pretrained(a.out)
    if a.epochs == 0:
        model.save_pretrained(a.out)
        tokenizer.save_pretrained(a.out)
    with open(os.path.join(a.out, "train_report.json"), "w") as f:
        json.dump(report, f)
    with open(os.path.join(a.out, "max_seq_len"), "w") as f:
        f.write(str(a.max_seq_len))


def predict(a):
    device = "cuda" if torch.cuda.is_available() else "cpu"
    tokenizer = AutoTokenizer.from_pretrained(a.model)
    model = AutoModelForSequenceClassification.from_pretrained(a.model).to(device)
    with open(os.path.join(a.model, "max_seq_len")) as f:
        max_len = int(f.read())
    probs = predict_proba(model, tokenizer, read_jsonl(a.input), max_len, 32, device)
    with open(a.output, "w") as f:
        for row in probs:
            f.write(json.dumps({"probabilities": [float(p) for p in row / row.sum()]}) + "\n")


def main():
    p = argparse.ArgumentParser()
    sub = p.add_subparsers(dest="cmd", required=True)
    ft = sub.add_parser("fine-tune")
    ft.add_argument("--backend", required=True)
    ft.add_argument("--checkpoint", required=True)
    ft.add_argument("--train", required=True)
    ft.add_argument("--val")
    ft.add_argument("--out", required=True)
    ft.add_argument("--num-labels", type=int, required=True)
    ft.add_argument("--epochs", type=int, default=3)
    ft.add_argument("--lr", type=float, default=2e-5)
    ft.add_argument("--batch-size", type=int, default=16)
    ft.add_argument("--max-seq-len", type=int, default=256)
    ft.add_argument("--seed", type=int, default=1)
    ft.add_argument("--class-weights")
    ft.add_argument("--gamma", type=float, default=0.0)
    pr = sub.add_parser("predict")
    pr.add_argument("--model", required=True)
    pr.add_argument("--input", required=True)
    pr.add_argument("--output", required=True)
    a = p.parse_args()
    fine_tune(a) if a.cmd == "fine-tune" else predict(a)


if __name__ == "__main__":
    main()
