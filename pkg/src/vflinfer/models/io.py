"""JSON serialization for every trained model kind.

Schema: a single object with a "kind" tag among logreg/mlp/tree/forest.
Weights are nested lists; tree nodes are an array in full-binary order of
{"leaf": bool, "label": int} or {"leaf": false, "feature": int,
"threshold": float} objects.
"""

from __future__ import annotations

import json
import math

import numpy as np

from ..errors import InputError
from .logreg import LogRegModel
from .mlp import Layer, Mlp
from .tree import DecisionTree, RandomForest, TreeNode


def model_to_dict(model) -> dict:
    if isinstance(model, LogRegModel):
        return {
            "kind": "logreg",
            "num_classes": model.num_classes,
            "weights": model.weights.tolist(),
        }
    if isinstance(model, Mlp):
        layers = []
        for layer in model.layers:
            layers.append(
                {
                    "w": layer.w.tolist(),
                    "b": layer.b.tolist(),
                    "gain": None if layer.gain is None else layer.gain.tolist(),
                    "bias": None if layer.bias is None else layer.bias.tolist(),
                }
            )
        return {
            "kind": "mlp",
            "sizes": list(model.sizes),
            "head": model.head,
            "dropout": model.dropout,
            "layer_norm": model.layer_norm,
            "layers": layers,
        }
    if isinstance(model, DecisionTree):
        return {
            "kind": "tree",
            "depth": model.depth,
            "num_classes": model.num_classes,
            "nodes": [_node_to_dict(n) for n in model.nodes],
        }
    if isinstance(model, RandomForest):
        return {
            "kind": "forest",
            "num_classes": model.num_classes,
            "trees": [model_to_dict(t) for t in model.trees],
        }
    raise InputError(f"cannot serialize {type(model).__name__}")


def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"leaf": True, "label": node.label}
    return {"leaf": False, "feature": node.feature, "threshold": node.threshold}


def model_from_dict(obj: dict):
    kind = obj.get("kind")
    if kind == "logreg":
        return LogRegModel(int(obj["num_classes"]), np.asarray(obj["weights"]))
    if kind == "mlp":
        model = Mlp(
            sizes=list(obj["sizes"]),
            head=obj["head"],
            dropout=float(obj["dropout"]),
            layer_norm=bool(obj["layer_norm"]),
        )
        for entry in obj["layers"]:
            model.layers.append(
                Layer(
                    w=np.asarray(entry["w"], dtype=np.float64),
                    b=np.asarray(entry["b"], dtype=np.float64),
                    gain=None if entry["gain"] is None else np.asarray(entry["gain"]),
                    bias=None if entry["bias"] is None else np.asarray(entry["bias"]),
                )
            )
        return model
    if kind == "tree":
        nodes = []
        for entry in obj["nodes"]:
            if entry["leaf"]:
                nodes.append(TreeNode(is_leaf=True, label=int(entry["label"])))
            else:
                nodes.append(
                    TreeNode(
                        is_leaf=False,
                        feature=int(entry["feature"]),
                        threshold=float(entry["threshold"]),
                    )
                )
        return DecisionTree(int(obj["depth"]), int(obj["num_classes"]), nodes)
    if kind == "forest":
        return RandomForest(
            trees=[model_from_dict(t) for t in obj["trees"]],
            num_classes=int(obj["num_classes"]),
        )
    raise InputError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    with open(str(path), "w") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path):
    with open(str(path)) as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError("model file must be a JSON object with a 'kind' tag")
    model = model_from_dict(obj)
    if not _finite_model(model):
        raise InputError("model file contains non-finite parameters")
    return model


def _finite_model(model) -> bool:
    if isinstance(model, LogRegModel):
        return bool(np.all(np.isfinite(model.weights)))
    if isinstance(model, Mlp):
        return all(
            np.all(np.isfinite(layer.w)) and np.all(np.isfinite(layer.b))
            for layer in model.layers
        )
    if isinstance(model, DecisionTree):
        return all(
            node.is_leaf or math.isfinite(node.threshold) for node in model.nodes
        )
    if isinstance(model, RandomForest):
        return all(_finite_model(t) for t in model.trees)
    return False
