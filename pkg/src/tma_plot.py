from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import structlog  # noqa: E402

from tma_exception import OutputException  # noqa: E402


class Plotting:
    """Optional SVG line plots next to the CSVs; never compared byte for byte"""

    @staticmethod
    def line_plot(
        path: Path,
        x: np.ndarray | Mapping[str, np.ndarray],
        series: Mapping[str, np.ndarray],
        xlabel: str,
        ylabel: str,
        title: str,
        step: bool = False,
        markers: bool = False,
    ) -> Path:
        """x is either shared by every series or given per series label"""
        fig, ax = plt.subplots(figsize=(8, 4.5))
        try:
            for label, y in series.items():
                xs = x[label] if isinstance(x, Mapping) else x
                if step:
                    ax.step(xs, y, where="post", label=label)
                else:
                    ax.plot(xs, y, marker="o" if markers else None, linewidth=1, label=label)
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            ax.set_title(title)
            ax.grid(True, alpha=0.25)
            if len(series) > 1:
                ax.legend(fontsize="small")
            fig.tight_layout()
            # no creation date, so reruns differ as little as possible
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as os_error:
            raise OutputException(f"Unable to write {path}: {os_error}")
        finally:
            plt.close(fig)

        structlog.getLogger(Plotting.__name__).debug("Plotted", path=str(path), series=len(series))
        return path
