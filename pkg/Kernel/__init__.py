# Kernel package
