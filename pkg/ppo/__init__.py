# Proximal Policy Optimization trainer
