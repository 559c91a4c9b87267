"""JSON persistence for fitted models together with their input scaling."""

import json

from .dataset import Normalizer
from .forest import ForestModel
from .naive_bayes import NBModel
from .network import NetModel

FORMAT = "croppat-model/1"
_CLASSES = {"nb": NBModel, "rf": ForestModel, "dnn": NetModel}


def dump_model(kind, model, normalizer: Normalizer, class_names, path):
    doc = {
        "format": FORMAT,
        "kind": kind,
        "class_names": list(class_names),
        "normalizer": normalizer.to_dict(),
        "model": model.to_dict(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, allow_nan=False)
        fh.write("\n")


def load_model(path):
    """Returns ``(kind, model, normalizer, class_names)``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT or doc.get("kind") not in _CLASSES:
        raise ValueError(f"{path}: not a {FORMAT} document")
    kind = doc["kind"]
    model = _CLASSES[kind].from_dict(doc["model"])
    return kind, model, Normalizer.from_dict(doc["normalizer"]), tuple(doc["class_names"])
