"""Property charts.

This module draws a Matplotlib figure out of the totals
of a gradual guarantee session.
"""

from typing import TYPE_CHECKING

from matplotlib import figure

if TYPE_CHECKING:
    from matplotlib.figure import Figure
    from model.gradual import PropertyReport


def create_outcome_chart(report):
    # type: (PropertyReport) -> Figure
    """Create a Matplotlib figure with the case verdicts and run outcomes of `report`.

    Args:
        `report`: Totals returned by `run_properties`.

    Returns:
        `Figure`: Matplotlib figure.
    """
    fig = figure.Figure(figsize=(9, 4))

    ax1 = fig.add_subplot(121)
    labels = ["ok", "skipped", "failed"]
    ax1.bar(labels, [report.ok, report.skipped, len(report.failures)],
            color=["green", "gray", "red"])
    ax1.set_title('Cases')
    ax1.set_ylabel("Count")

    ax2 = fig.add_subplot(122)
    pairs = sorted(report.outcomes.items(), key=lambda kv: -kv[1])
    names = ["\n".join(k) for k, _ in pairs]
    ax2.bar(names, [v for _, v in pairs], color="blue")
    ax2.set_title('Outcomes (precise / imprecise)')
    ax2.tick_params(axis="x", labelsize=7)

    fig.suptitle(f"Gradual guarantee, {report.cases} cases")
    fig.set_tight_layout(True)

    return fig


def save_chart(fig, filepath):
    # type: (Figure, str) -> None
    fig.savefig(filepath)
