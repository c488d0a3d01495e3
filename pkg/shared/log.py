import logging

LOGGER_NAME = 'cuvrp'


def setup_logger(level: int = logging.INFO) -> logging.Logger:
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)

    # Un seul handler, même si la CLI est appelée plusieurs fois dans un process
    logger.handlers = []

    ch = logging.StreamHandler()
    ch.setFormatter(logging.Formatter('%(levelname)s - %(name)s - %(message)s'))
    ch.setLevel(level)
    logger.addHandler(ch)

    return logger


def get_logger(module: str) -> logging.Logger:
    """Logger nommé sous la racine 'cuvrp'."""
    return logging.getLogger(f'{LOGGER_NAME}.{module}')
