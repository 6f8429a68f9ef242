# Episodic compressed-air control environment
