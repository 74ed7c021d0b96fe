from django.db import models


class SweepRecord(models.Model):
    MODEL_CHOICES = [
        ("monotone", "monotono"),
        ("binary", "binario"),
    ]

    seed = models.CharField(max_length=24)
    model = models.CharField(max_length=10, choices=MODEL_CHOICES)
    count = models.PositiveIntegerField()
    spec = models.JSONField()
    bound_report = models.JSONField()
    violation_count = models.PositiveIntegerField(default=0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["-created_at"]

    def __str__(self) -> str:
        return f"Varredura {self.model} seed={self.seed} ({self.count} cenarios)"


class RunRecord(models.Model):
    sweep = models.ForeignKey(SweepRecord, on_delete=models.CASCADE, related_name="runs")
    index = models.PositiveIntegerField()
    scenario = models.JSONField()
    met = models.BooleanField(default=False)
    time_from_later_start = models.CharField(max_length=64, blank=True)
    summary = models.JSONField()

    class Meta:
        ordering = ["index"]
        constraints = [
            models.UniqueConstraint(fields=["sweep", "index"], name="unique_run_per_sweep"),
        ]

    def __str__(self) -> str:
        return f"Cenario {self.index} da varredura {self.sweep_id}"
