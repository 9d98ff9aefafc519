#!/usr/bin/env python3
"""Regenerates the tiny ONNX fixtures used by the feature-extraction tests.

toy_identity.onnx  input [1,3,2,2] -> Identity("stage") -> Flatten("embedding") [1,12]
toy_meanpool.onnx  input [1,3,8,8] -> GlobalAveragePool("pooled") -> Flatten("embedding") [1,3]
"""
import os

import onnx
from onnx import TensorProto, helper

HERE = os.path.dirname(os.path.abspath(__file__))


def save(graph, name):
    model = helper.make_model(graph, producer_name="foldscan-fixtures",
                              opset_imports=[helper.make_opsetid("", 11)])
    model.ir_version = 6
    onnx.checker.check_model(model)
    onnx.save(model, os.path.join(HERE, name))


def identity_model():
    x = helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 3, 2, 2])
    y = helper.make_tensor_value_info("embedding", TensorProto.FLOAT, [1, 12])
    nodes = [
        helper.make_node("Identity", ["input"], ["stage"], name="stage"),
        helper.make_node("Flatten", ["stage"], ["embedding"], name="embedding", axis=1),
    ]
    save(helper.make_graph(nodes, "toy_identity", [x], [y]), "toy_identity.onnx")


def meanpool_model():
    x = helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 3, 8, 8])
    y = helper.make_tensor_value_info("embedding", TensorProto.FLOAT, [1, 3])
    nodes = [
        helper.make_node("GlobalAveragePool", ["input"], ["pooled"], name="pooled"),
        helper.make_node("Flatten", ["pooled"], ["embedding"], name="embedding", axis=1),
    ]
    save(helper.make_graph(nodes, "toy_meanpool", [x], [y]), "toy_meanpool.onnx")


if __name__ == "__main__":
    identity_model()
    meanpool_model()
