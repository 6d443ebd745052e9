"""gan_trainer: conditional WGAN-GP over order-stream files, with a frozen
learned book-update surrogate inside the generator."""
