"""Command-line surface: matrix files, reports and the analyze/model/sweep/verify commands."""
