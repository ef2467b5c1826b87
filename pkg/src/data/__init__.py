# COCO instances ingestion
