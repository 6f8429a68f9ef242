# Explainability pipeline: perturbation sweeps, gradient saliency, Shapley attribution
