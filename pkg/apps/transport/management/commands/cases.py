from django.core.management.base import BaseCommand

from apps.transport.utils.util_case_library import CASE_IDS, case_library


def describe_case(case_id):
    problem = case_library(case_id).problem
    return (
        f"case {case_id:2d}: {problem.m} layers on [0, {problem.length:g}], "
        f"inlet a={problem.inlet.a:g} b={problem.inlet.b:g} g={problem.inlet.signal}"
    )


class Command(BaseCommand):
    help = 'List the catalogued benchmark cases.'

    def handle(self, *args, **options):
        for case_id in CASE_IDS:
            self.stdout.write(describe_case(case_id))
