# Criteria package
