# Dense feed-forward classifier with analytic gradients, and its optimizer
