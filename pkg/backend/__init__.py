# FastAPI service over the coordinator
