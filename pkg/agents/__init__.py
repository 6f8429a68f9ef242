# Controllers that drive the plant, and the coordinator that runs them
