from django.core.management.base import BaseCommand

from ifs_core.catalog import list_builtin_systems


class Command(BaseCommand):
    help = 'Lists the bundled example systems'

    def handle(self, *args, **options):
        for definition in list_builtin_systems():
            system = definition.system
            stated = 'n/a' if definition.stated_dimension is None else f'{definition.stated_dimension:.6f}'
            ssc = 'SSC' if definition.ssc_claimed else '-'
            self.stdout.write(
                f'{definition.name:<24} R^{system.ambient_dim}  {system.kind:<14} dim {stated}  {ssc}'
            )
            if definition.description:
                self.stdout.write(f'    {definition.description}')
