"""Point clouds, spatial indexing and sampling."""
