from django.db import models

from .verdicts import OUTCOME_CHOICES


class ExperimentRun(models.Model):
    KIND_CHOICES = [
        ('dim', 'Dimension estimate'),
        ('sweep', 'Exceptional directions'),
        ('energy', 'Energy ladder'),
        ('counting', 'Counting bound'),
        ('almost-dc', 'Almost dimension conservation'),
        ('transversality', 'Transversality scan'),
    ]

    kind = models.CharField(max_length=20, choices=KIND_CHOICES)
    system_name = models.CharField(max_length=100, blank=True)
    seed = models.IntegerField()
    config = models.JSONField(default=dict)
    exit_code = models.IntegerField(default=0)
    output_dir = models.CharField(max_length=500)

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    def __str__(self):
        return f"{self.get_kind_display()} - {self.system_name or 'no system'} (seed {self.seed})"

    @property
    def passed(self):
        return self.exit_code == 0

    class Meta:
        verbose_name = "Experiment Run"
        verbose_name_plural = "Experiment Runs"
        ordering = ['-created_at']


class VerdictRecord(models.Model):
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='verdicts')
    check_name = models.CharField(max_length=100)
    outcome = models.CharField(max_length=20, choices=OUTCOME_CHOICES)
    measured = models.FloatField(null=True, blank=True)
    bound = models.FloatField(null=True, blank=True)
    detail = models.TextField(blank=True)

    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return f"{self.check_name}: {self.outcome}"

    class Meta:
        verbose_name = "Verdict"
        verbose_name_plural = "Verdicts"
        ordering = ['run', 'id']
