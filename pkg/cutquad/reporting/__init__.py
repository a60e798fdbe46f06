from cutquad.reporting.artifacts import ArtifactEntry, ArtifactManifest, read_manifest, write_manifest
from cutquad.reporting.html import html_summary, render_summary
from cutquad.reporting.svg import plot_convergence_svg, plot_points_svg, plot_shift_svg
from cutquad.reporting.tables import (
    write_comparison_json,
    write_convergence_csv,
    write_measurements_csv,
    write_shift_csv,
)
