"""Named reproducible experiments, the acceptance suite and the command-line front end."""
