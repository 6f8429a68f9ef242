# Recurrent actor-critic policy
