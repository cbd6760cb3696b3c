import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np

from synthdata.entities import FederatedDataset
from utils.exceptions import DimensionMismatchException, InvalidConfigurationException
from utils.files import atomic_write_text

TEST_CLIENT = -1


@dataclass(frozen=True)
class BundleTable:
    split: np.ndarray
    client: np.ndarray
    inputs: np.ndarray
    truth: np.ndarray
    observed: np.ndarray

    def rows(self, split: str) -> np.ndarray:
        return np.flatnonzero(self.split == split)


class DatasetRepository:
    """
    Columnar text form of a federated dataset: a header row, then one sample per
    line with its split, owning client, inputs, truth labels and observed labels.
    Floats are written with repr so a reload is exact.
    """

    @staticmethod
    def header(input_dim: int, num_classes: int) -> List[str]:
        return (
            ["split", "client"]
            + [f"x{i}" for i in range(input_dim)]
            + [f"y{c}" for c in range(num_classes)]
            + [f"o{c}" for c in range(num_classes)]
        )

    def render_bundle(self, dataset: FederatedDataset) -> str:
        input_dim = dataset.test_inputs.shape[1]
        num_classes = dataset.test_labels.shape[1]
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header(input_dim, num_classes))

        def write(split, client_id, inputs, truth, observed):
            for x, y, o in zip(inputs, truth, observed):
                writer.writerow(
                    [split, client_id]
                    + [repr(float(v)) for v in x]
                    + [int(v) for v in y]
                    + [int(v) for v in o]
                )

        for shard in dataset.shards:
            write("train", shard.client_id, shard.inputs, shard.truth_labels, shard.observed_labels)
        write("test", TEST_CLIENT, dataset.test_inputs, dataset.test_labels, dataset.test_labels)
        return buffer.getvalue()

    def export_bundle(self, dataset: FederatedDataset, path: Union[str, Path]) -> Path:
        return atomic_write_text(path, self.render_bundle(dataset))

    @staticmethod
    def load_bundle(path: Union[str, Path]) -> BundleTable:
        with open(path, encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise InvalidConfigurationException(f"Bundle file {path} is empty.")
            rows = list(reader)

        input_dim = sum(1 for name in header if name.startswith("x"))
        num_classes = sum(1 for name in header if name.startswith("y"))
        if len(header) != 2 + input_dim + 2 * num_classes:
            raise DimensionMismatchException(f"Bundle header of {path} is malformed.", header=header)

        split = np.array([row[0] for row in rows])
        client = np.array([int(row[1]) for row in rows], dtype=np.int64)
        values = np.array([[float(v) for v in row[2:]] for row in rows]).reshape(len(rows), len(header) - 2)
        return BundleTable(
            split=split,
            client=client,
            inputs=values[:, :input_dim],
            truth=values[:, input_dim:input_dim + num_classes],
            observed=values[:, input_dim + num_classes:],
        )
