from django.db import models

from experiments.enums import RunCommand, RunStatus
from federation.enums import Mode, Stage


class ExperimentRun(models.Model):
    command = models.CharField(max_length=20, choices=RunCommand.choices(), default=RunCommand.RUN.value)
    label = models.CharField(max_length=100, blank=True)
    status = models.CharField(max_length=20, choices=RunStatus.choices(), default=RunStatus.PENDING.value)
    mode = models.CharField(max_length=20, choices=Mode.choices())
    seed = models.IntegerField()
    config = models.JSONField()
    output_dir = models.CharField(max_length=500)
    final_bacc = models.FloatField(null=True, blank=True)
    final_auc = models.FloatField(null=True, blank=True)
    final_map = models.FloatField(null=True, blank=True)
    error_message = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    started_at = models.DateTimeField(null=True, blank=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    def __str__(self):
        return f"{self.command} {self.label or self.mode} (seed {self.seed}) - {self.status}"


class RoundMetric(models.Model):
    run = models.ForeignKey('experiments.ExperimentRun', related_name='round_metrics', on_delete=models.CASCADE)
    round_index = models.IntegerField()
    stage = models.CharField(max_length=20, choices=Stage.choices())
    bacc = models.FloatField(null=True, blank=True)
    auc = models.FloatField(null=True, blank=True)
    map = models.FloatField(null=True, blank=True)
    coverage = models.FloatField(default=0.0)
    tag_precision = models.FloatField(null=True, blank=True)

    class Meta:
        unique_together = ('run', 'round_index')
        ordering = ['round_index']

    def __str__(self):
        return f"Run {self.run_id} round {self.round_index}"
