import logging
from dataclasses import replace

from synthdata.entities import FederatedDataset, SyntheticSpec
from synthdata.generator import generate_dataset
from synthdata.masking import apply_mask, build_mask_plan, partition_clients
from utils.streams import MASK_STREAM, derived_seed

logger = logging.getLogger(__name__)


class DatasetService:

    @staticmethod
    def prepare(spec: SyntheticSpec, num_clients: int, missing: int) -> FederatedDataset:
        """
        Generates the data, splits it evenly over the clients and hides `missing`
        classes from each of them.
        """
        bundle = generate_dataset(spec)
        plan = build_mask_plan(num_clients, spec.num_classes, missing, derived_seed(spec.seed, MASK_STREAM))
        shards = []
        for shard in partition_clients(bundle.train_inputs, bundle.train_labels, num_clients):
            masked = apply_mask(shard.truth_labels, plan.negative_classes(shard.client_id))
            shards.append(replace(shard, observed_labels=masked.observed, active_mask=masked.active_mask))
            logger.debug(
                f"Client {shard.client_id}: {shard.num_samples} samples, "
                f"active classes {list(plan.active_classes(shard.client_id))}"
            )

        logger.info(f"Annotation distribution: {[sorted(labelers) for labelers in plan.annotation]}")
        return FederatedDataset(
            spec=spec,
            plan=plan,
            shards=tuple(shards),
            test_inputs=bundle.test_inputs,
            test_labels=bundle.test_labels,
            train_size=bundle.train_inputs.shape[0],
        )
