# Generated by Django 4.2.23 on 2026-10-18 09:12

from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='EvaluationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('manifest', models.CharField(max_length=1024)),
                ('params', models.JSONField(default=dict)),
                ('configuration_count', models.PositiveIntegerField()),
                ('success_count', models.PositiveIntegerField()),
                ('lsr', models.FloatField(help_text='Localisation success ratio in percent')),
                ('summary', models.JSONField(default=dict)),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['manifest'], name='lode_run_manifest_idx')],
            },
        ),
        migrations.CreateModel(
            name='ConfigurationOutcome',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('position', models.PositiveIntegerField(help_text='Row index in manifest order')),
                ('config_id', models.CharField(db_index=True, max_length=128)),
                ('success', models.BooleanField()),
                ('width_mm', models.FloatField(blank=True, null=True)),
                ('height_mm', models.FloatField(blank=True, null=True)),
                ('err_w_mm', models.FloatField(blank=True, null=True)),
                ('err_h_mm', models.FloatField(blank=True, null=True)),
                ('iterations', models.PositiveIntegerField(blank=True, null=True)),
                ('reason', models.CharField(blank=True, max_length=64)),
                ('tags', models.JSONField(default=list)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='outcomes', to='lode_app.evaluationrun')),
            ],
            options={
                'ordering': ['run', 'position'],
            },
        ),
        migrations.AddConstraint(
            model_name='configurationoutcome',
            constraint=models.UniqueConstraint(fields=('run', 'position'), name='uniq_outcome_run_position'),
        ),
    ]
