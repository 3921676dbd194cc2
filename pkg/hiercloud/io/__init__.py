"""Reading and writing point clouds, predictions, labels and split tables."""
