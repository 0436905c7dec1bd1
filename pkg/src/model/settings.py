"""Settings management.

This module stores the Settings class, used for managing
and changing the parameters of the checker, the solver
and the property harness.
"""
from copy import deepcopy

from config import FAILURES_DIR


class Settings:
    """
    Stores all the configuration parameters
    for checking, solving, running and property testing.
    """
    _solver_settings = ['int_range', 'list_len', 'elem_range', 'search_limit',
                        'prover_rounds', 'smt_out', 'smt_solver', 'smt_bound']

    def __init__(self,
            fuel=1_000_000, poly=True,
            int_range=(-4, 4), list_len=3, elem_range=(0, 4),
            search_limit=3000, prover_rounds=400,
            smt_out=None, smt_solver=None, smt_bound=3,
            dump_chc=None, json=False,
            stubs=None, failures_dir=FAILURES_DIR
        ):
        """
        Configuration parameters for checking, solving
        and property testing.

        Args:
            `fuel` (int, optional): Reduction steps before a run gives up.
            Defaults to 1_000_000.

            `poly` (bool, optional): Split shape-polymorphic top-level functions.
            Defaults to True.

            `int_range` (tuple, optional): Bounds of the integers tried by the
            bounded search. Defaults to (-4, 4).

            `list_len` (int, optional): Longest list tried by the bounded search.
            Defaults to 3.

            `elem_range` (tuple, optional): Bounds of the list elements tried.
            Defaults to (0, 4).

            `search_limit` (int, optional): Assignments tried per query. Defaults to 3000.

            `prover_rounds` (int, optional): Rewriting rounds of the decision
            procedure. Defaults to 400.

            `smt_out` (str, optional): Directory where unknown queries are written
            as SMT-LIB 2 scripts. Defaults to None.

            `smt_solver` (str, optional): Command of an external solver fed with
            those scripts. Defaults to None.

            `smt_bound` (int, optional): Longest list in the SMT-LIB encoding.
            Defaults to 3.

            `dump_chc` (str, optional): File where the clauses are written. Defaults to None.

            `json` (bool, optional): Print reports as JSON. Defaults to False.

            `stubs` (list, optional): Extra stub files, loaded after the prelude.

            `failures_dir` (str, optional): Where property failures are dumped.
            Defaults to "gg-failures".
        """
        self.fuel = fuel
        self.poly = poly

        self.int_range = tuple(int_range)
        self.list_len = list_len
        self.elem_range = tuple(elem_range)
        self.search_limit = search_limit
        self.prover_rounds = prover_rounds

        self.smt_out = smt_out
        self.smt_solver = smt_solver
        self.smt_bound = smt_bound

        self.dump_chc = dump_chc
        self.json = json
        self.stubs = list(stubs or [])
        self.failures_dir = failures_dir

    def set_setting(self, **settings):
        """
        Change multiple settings at once.
        Pairs given as lists (as read from JSON) are turned into tuples.

        Raises:
            `AttributeError`: The setting does not exist.
        """
        errors = []
        for k, v in settings.items():
            if hasattr(self, k):
                if k in ('int_range', 'elem_range'):
                    v = tuple(v)
                setattr(self, k, v)
            else:
                errors.append(k)
        if errors:
            raise AttributeError(
                'Settings object has no attributes: ' + str(errors))

    def changes_solver_setting(self, **settings):
        """
        Checks if a setting changes the solver's behaviour,
        that is, cached answers must be dropped.
        """
        return any(settings[key] != getattr(self, key) for key in settings if key in self._solver_settings)

    def solver_options(self):
        """Keyword arguments for `solver.configure`."""
        return {
            'int_range': self.int_range, 'list_len': self.list_len,
            'elem_range': self.elem_range, 'search_limit': self.search_limit,
            'rounds': self.prover_rounds, 'smt_out': self.smt_out,
            'smt_solver': self.smt_solver, 'smt_bound': self.smt_bound,
        }

    def to_dict(self):
        """Return all settings as a dictionary."""
        return deepcopy(self.__dict__)
