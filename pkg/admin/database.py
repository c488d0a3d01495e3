"""
Stockage MongoDB des réglages du laboratoire.
Un document par réglage : {'section', 'key', 'value'}.
"""

import os
from typing import Any, Dict, List, Optional

from pymongo import MongoClient

from shared.log import get_logger

logger = get_logger('database')

DATABASE_NAME = 'cuvrp_admin'


class AdminDB:
    """Gestionnaire de la base de données d'administration."""

    _instance: Optional['AdminDB'] = None

    def __init__(self, uri: str = None, client: Any = None):
        self.uri = uri or os.environ.get('MONGO_URI', 'mongodb://localhost:27017')
        self.client = client if client is not None else MongoClient(self.uri, serverSelectionTimeoutMS=2000)
        self.db = self.client[DATABASE_NAME]

        # Collections
        self.settings = self.db['settings']

    @classmethod
    def get_instance(cls, uri: str = None) -> 'AdminDB':
        """Singleton pattern pour la connexion."""
        if cls._instance is None:
            cls._instance = cls(uri)
        return cls._instance

    def init_default_data(self) -> int:
        """Sème les réglages par défaut si la collection est vide ; retourne le nombre inséré."""
        if self.settings.count_documents({}) > 0:
            return 0
        from admin.config import default_settings

        docs = self._settings_documents(default_settings())
        self.settings.insert_many(docs)
        logger.info("base d'administration initialisée (%d réglages)", len(docs))
        return len(docs)

    def reset(self):
        self.settings.delete_many({})

    def set_value(self, section: str, key: str, value: Any):
        self.settings.update_one({'section': section, 'key': key},
                                 {'$set': {'value': value}}, upsert=True)

    def overrides(self) -> Dict[str, Any]:
        return {f"{doc['section']}.{doc['key']}": doc['value'] for doc in self.settings.find()}

    @staticmethod
    def _settings_documents(settings: Dict[str, Dict[str, Any]]) -> List[dict]:
        return [
            {'section': section, 'key': key, 'value': value}
            for section, values in settings.items()
            for key, value in values.items()
        ]

    def close(self):
        """Ferme la connexion."""
        if self.client:
            self.client.close()
